#include "impact/fbsde_mc.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <random>

#include <Eigen/LU>

#include "impact/errors.hpp"
#include "impact/parallel.hpp"

namespace impact {

namespace {

constexpr int kChunk = 256;
constexpr int kMaxPlayers = 16;
using SmallMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, 0, kMaxPlayers, kMaxPlayers>;
using SmallVec = Eigen::Matrix<double, Eigen::Dynamic, 1, 0, kMaxPlayers, 1>;
// relative Schur-complement floor below which a basis column counts as dependent
constexpr double kSpanTol = 1e-10;

/// Least-squares projection onto total-degree polynomials of standardized
/// state variables. Constant and duplicated variables are dropped first.
class Regressor {
public:
    Regressor(const Matrix& state, int degree, double ridge, int step) {
        const auto np = state.rows();
        std::vector<Vector> vars;
        for (Eigen::Index j = 0; j < state.cols(); ++j) {
            const Vector col = state.col(j);
            const double mean = col.mean();
            const double sd = std::sqrt((col.array() - mean).square().mean());
            if (!(sd > 1e-12 * std::max(1.0, std::abs(mean)))) continue;
            Vector z = (col.array() - mean) / sd;
            bool dup = false;
            for (const auto& v : vars) {
                if ((v - z).cwiseAbs().maxCoeff() <= 1e-10 || (v + z).cwiseAbs().maxCoeff() <= 1e-10) {
                    dup = true;
                    break;
                }
            }
            if (!dup) vars.push_back(std::move(z));
        }

        // monomials of total degree <= degree, enumerated by exponent vectors
        std::vector<std::vector<int>> exps{std::vector<int>(vars.size(), 0)};
        for (int d = 1; d <= degree; ++d) {
            std::vector<std::vector<int>> next;
            for (const auto& e : exps) {
                int total = 0;
                for (int x : e) total += x;
                if (total != d - 1) continue;
                // extend only at or after the last nonzero slot to avoid repeats
                std::size_t last = 0;
                for (std::size_t v = 0; v < e.size(); ++v)
                    if (e[v] > 0) last = v;
                for (std::size_t v = last; v < e.size(); ++v) {
                    auto f = e;
                    ++f[v];
                    next.push_back(std::move(f));
                }
            }
            exps.insert(exps.end(), next.begin(), next.end());
        }

        basis_.resize(np, static_cast<Eigen::Index>(exps.size()));
        for (std::size_t c = 0; c < exps.size(); ++c) {
            Vector col = Vector::Ones(np);
            for (std::size_t v = 0; v < vars.size(); ++v)
                for (int p = 0; p < exps[c][v]; ++p) col = col.cwiseProduct(vars[v]);
            basis_.col(static_cast<Eigen::Index>(c)) = col;
        }

        if (!basis_.allFinite()) throw DegenerateRegression("regression: non-finite state", step);
        const auto np_d = static_cast<double>(np);
        const Matrix gram_all = (basis_.transpose() * basis_) / np_d;

        // keep columns not already in the span of the kept ones (incremental Cholesky)
        std::vector<Eigen::Index> keep;
        Matrix L = Matrix::Zero(gram_all.rows(), gram_all.cols());
        for (Eigen::Index c = 0; c < gram_all.cols(); ++c) {
            const auto m = static_cast<Eigen::Index>(keep.size());
            Vector row(m);
            for (Eigen::Index a = 0; a < m; ++a) {
                double v = gram_all(c, keep[static_cast<std::size_t>(a)]);
                for (Eigen::Index e = 0; e < a; ++e) v -= row(e) * L(a, e);
                row(a) = v / L(a, a);
            }
            const double d = gram_all(c, c) - row.squaredNorm();
            if (d > kSpanTol * gram_all(c, c)) {
                L.row(m).head(m) = row.transpose();
                L(m, m) = std::sqrt(d);
                keep.push_back(c);
            }
        }
        if (keep.empty()) throw DegenerateRegression("regression: empty basis", step);
        if (np < static_cast<Eigen::Index>(keep.size()))
            throw DegenerateRegression("regression: fewer paths than basis functions", step);
        if (keep.size() != static_cast<std::size_t>(basis_.cols())) {
            Matrix reduced(np, static_cast<Eigen::Index>(keep.size()));
            for (std::size_t a = 0; a < keep.size(); ++a) reduced.col(static_cast<Eigen::Index>(a)) = basis_.col(keep[a]);
            basis_ = std::move(reduced);
        }
        Matrix gram = (basis_.transpose() * basis_) / np_d;
        gram.diagonal().array() += ridge;
        llt_.compute(gram);
        if (llt_.info() != Eigen::Success) throw DegenerateRegression("regression: Gram factorization failed", step);
    }

    /// Fitted values for each column of Y.
    Matrix fit(const Matrix& Y) const {
        const Matrix coef = llt_.solve((basis_.transpose() * Y) / static_cast<double>(basis_.rows()));
        return basis_ * coef;
    }
    Vector fit(const Vector& y) const { return fit(Matrix(y)).col(0); }

    int size() const { return static_cast<int>(basis_.cols()); }

private:
    Matrix basis_;
    Eigen::LLT<Matrix> llt_;
};

Matrix sigma2_paths(const FactorModel& model, const Matrix& X) {
    return X.unaryExpr([&](double x) {
        const double s = model.sigma(x);
        return s * s;
    });
}

Matrix mu_paths(const FactorModel& model, const Matrix& X) {
    return X.unaryExpr([&](double x) { return model.mu(x); });
}

}  // namespace

FactorPaths simulate_factors(const FactorModel& model, const TimeGrid& grid, int n_paths, std::uint64_t seed) {
    if (n_paths < 1) throw InvalidArgument("simulate_factors: n_paths must be >= 1");
    const int N = grid.n_steps();
    const double dt = grid.dt();
    const double sdt = std::sqrt(dt);
    FactorPaths f;
    f.grid = grid;
    f.X.resize(n_paths, N + 1);
    f.dW.resize(n_paths, N);
    const int chunks = (n_paths + kChunk - 1) / kChunk;
    parallel_for(chunks, [&](int c) {
        const int r1 = std::min(n_paths, (c + 1) * kChunk);
        for (int r = c * kChunk; r < r1; ++r) {
            std::seed_seq ss{static_cast<std::uint32_t>(seed & 0xffffffffu), static_cast<std::uint32_t>(seed >> 32),
                             static_cast<std::uint32_t>(r)};
            std::mt19937_64 rng(ss);
            std::normal_distribution<double> normal(0.0, 1.0);
            double x = model.kind == FactorModel::Kind::ConstantVol ? model.level : model.x0;
            f.X(r, 0) = x;
            for (int k = 0; k < N; ++k) {
                const double dw = sdt * normal(rng);
                f.dW(r, k) = dw;
                if (model.kind == FactorModel::Kind::MeanRevertingVol)
                    x += model.speed * (model.level - x) * dt + model.vol_of_vol * dw;
                f.X(r, k + 1) = x;
            }
        }
    });
    return f;
}

McProblem nash_problem(const MarketParams& market, const std::vector<AgentParams>& agents, const FactorModel& model) {
    const int n = static_cast<int>(agents.size());
    const double b = market.b;
    McProblem pr;
    pr.b = b;
    pr.model = model;
    for (int i = 0; i < n; ++i) {
        const auto& ag = agents[static_cast<std::size_t>(i)];
        McPlayer p;
        p.kappa = beta_of(ag, market) / b;
        p.lambda = ag.lambda;
        p.s_mu = 1.0 / (2.0 * b);
        p.c = 0.0;
        p.q0 = ag.q0;
        p.w.assign(static_cast<std::size_t>(n), market.a / (2.0 * b));
        p.w[static_cast<std::size_t>(i)] = 0.0;
        pr.players.push_back(std::move(p));
    }
    return pr;
}

McProblem aggregate_problem(const MarketParams& market, double alpha, double lambda, double q0_total, int n,
                            const FactorModel& model) {
    const double b = market.b;
    McProblem pr;
    pr.b = b;
    pr.model = model;
    McPlayer p;
    p.kappa = (alpha - 0.5 * market.a) / b;
    p.lambda = lambda;
    p.s_mu = n / (2.0 * b);
    p.c = (n - 1) * market.a / (2.0 * b);
    p.q0 = q0_total;
    p.w = {0.0};
    pr.players.push_back(std::move(p));
    return pr;
}

TrajectorySet McFbsdeSolution::mean_trajectories() const {
    TrajectorySet t;
    t.grid = grid;
    t.provenance = "mc";
    const int n = n_players();
    t.Q.resize(n, grid.n_nodes());
    t.q.resize(n, grid.n_nodes());
    for (int i = 0; i < n; ++i) {
        t.Q.row(i) = Q[static_cast<std::size_t>(i)].colwise().mean();
        t.q.row(i) = q[static_cast<std::size_t>(i)].colwise().mean();
    }
    return t;
}

McFbsdeSolution picard_solve(const McProblem& problem, const TimeGrid& grid, const McOptions& opt) {
    const int n = static_cast<int>(problem.players.size());
    if (n < 1) throw InvalidArgument("picard_solve: no players");
    if (n > kMaxPlayers) throw InvalidArgument("picard_solve: at most 16 players are supported");
    if (opt.n_paths < 1000) throw InvalidArgument("picard_solve: n_paths must be >= 1000");
    if (opt.basis_degree < 0) throw InvalidArgument("picard_solve: basis_degree must be >= 0");
    for (const auto& p : problem.players)
        if (static_cast<int>(p.w.size()) != n) throw InvalidArgument("picard_solve: coupling weights have wrong size");

    const int N = grid.n_steps();
    const double dt = grid.dt();
    const double b = problem.b;
    const int nn = n * n;

    McFbsdeSolution sol;
    sol.grid = grid;
    sol.problem = problem;
    sol.factors = simulate_factors(problem.model, grid, opt.n_paths, opt.seed);
    const auto& F = sol.factors;
    const int np = opt.n_paths;
    const Matrix sig2 = sigma2_paths(problem.model, F.X);
    const Matrix mu = mu_paths(problem.model, F.X);

    Matrix W = Matrix::Zero(n, n);
    Vector C(n), lam(n), smu(n), q0(n);
    for (int i = 0; i < n; ++i) {
        const auto& pl = problem.players[static_cast<std::size_t>(i)];
        for (int j = 0; j < n; ++j) W(i, j) = i == j ? 0.0 : pl.w[static_cast<std::size_t>(j)];
        C(i) = pl.c;
        lam(i) = pl.lambda / b;
        smu(i) = pl.s_mu;
        q0(i) = pl.q0;
    }

    std::vector<Regressor> reg;
    reg.reserve(static_cast<std::size_t>(N));
    for (int k = 0; k < N; ++k) reg.emplace_back(Matrix(F.X.col(k)), opt.basis_degree, opt.ridge, k);

    // decoupling field per step: row r of P[k] is vec(P_k) on path r, row r of p[k] is p_k
    std::vector<Matrix> P(static_cast<std::size_t>(N + 1), Matrix::Zero(np, nn));
    std::vector<Matrix> p(static_cast<std::size_t>(N + 1), Matrix::Zero(np, n));
    std::vector<Matrix> Pbar(static_cast<std::size_t>(N), Matrix(np, nn));
    std::vector<Matrix> pbar(static_cast<std::size_t>(N), Matrix(np, n));
    std::vector<Matrix> Qp(static_cast<std::size_t>(N + 1), Matrix(np, n));
    std::vector<Matrix> qp(static_cast<std::size_t>(N + 1), Matrix::Zero(np, n));
    {
        Matrix PT = Matrix::Zero(n, n);
        for (int i = 0; i < n; ++i) PT(i, i) = -problem.players[static_cast<std::size_t>(i)].kappa;
        const Eigen::Map<const Eigen::RowVectorXd> vecPT(PT.data(), nn);
        P[static_cast<std::size_t>(N)].rowwise() = vecPT;
    }
    const int chunks = (np + kChunk - 1) / kChunk;
    const SmallMat Ws = W;
    const SmallVec Cs = C, lams = lam, smus = smu;

    for (int it = 1; it <= opt.max_picard; ++it) {
        std::vector<Matrix> Pn = P, pn = p;
        for (int k = N - 1; k >= 0; --k) {
            const auto sk = static_cast<std::size_t>(k);
            Pbar[sk] = reg[sk].fit(Pn[sk + 1]);
            pbar[sk] = reg[sk].fit(pn[sk + 1]);
            parallel_for(chunks, [&](int c) {
                const int r1 = std::min(np, (c + 1) * kChunk);
                for (int r = c * kChunk; r < r1; ++r) {
                    SmallMat Pbm(n, n), Pold(n, n);
                    for (int e = 0; e < nn; ++e) {
                        Pbm.data()[e] = Pbar[sk](r, e);
                        Pold.data()[e] = P[sk](r, e);
                    }
                    const SmallVec pold = p[sk].row(r).transpose();
                    SmallMat D = SmallMat::Identity(n, n) - dt * Pbm;
                    D.diagonal() -= dt * Cs;
                    SmallMat rhsP = Pbm + dt * Ws * Pold;
                    rhsP.diagonal() -= dt * sig2(r, k) * lams;
                    const SmallVec rhsp = pbar[sk].row(r).transpose() + dt * (mu(r, k) * smus + Ws * pold);
                    const Eigen::PartialPivLU<SmallMat> lu(D);
                    const SmallMat Pk = lu.solve(rhsP);
                    const SmallVec pk = lu.solve(rhsp);
                    for (int e = 0; e < nn; ++e) Pn[sk](r, e) = Pk.data()[e];
                    pn[sk].row(r) = pk.transpose();
                }
            });
        }

        // forward roll
        std::vector<Matrix> Qn(static_cast<std::size_t>(N + 1), Matrix(np, n));
        std::vector<Matrix> qn(static_cast<std::size_t>(N + 1), Matrix(np, n));
        parallel_for(chunks, [&](int c) {
            const int r1 = std::min(np, (c + 1) * kChunk);
            for (int r = c * kChunk; r < r1; ++r) {
                SmallVec Qr = q0;
                for (int k = 0; k <= N; ++k) {
                    const auto sk = static_cast<std::size_t>(k);
                    SmallMat Pk(n, n);
                    for (int e = 0; e < nn; ++e) Pk.data()[e] = Pn[sk](r, e);
                    const SmallVec qr = Pk * Qr + pn[sk].row(r).transpose();
                    Qn[sk].row(r) = Qr.transpose();
                    qn[sk].row(r) = qr.transpose();
                    Qr += dt * qr;
                }
            }
        });

        double change = 0.0, scale = 0.0;
        for (int k = 0; k <= N; ++k) {
            const auto sk = static_cast<std::size_t>(k);
            change = std::max(change, std::sqrt((qn[sk] - qp[sk]).squaredNorm() / np));
            scale = std::max(scale, std::sqrt(qn[sk].squaredNorm() / np));
        }
        const double rel = scale > 0.0 ? change / scale : change;
        sol.history.push_back(rel);
        P = std::move(Pn);
        p = std::move(pn);
        Qp = std::move(Qn);
        qp = std::move(qn);
        if (!std::isfinite(rel)) break;
        if (rel < opt.tol) {
            sol.picard_iterations = it;
            sol.final_residual = rel;
            break;
        }
    }
    if (sol.picard_iterations == 0)
        throw NoConvergence("picard_solve: Picard iteration did not converge", static_cast<int>(sol.history.size()),
                            sol.history);

    sol.Q.assign(static_cast<std::size_t>(n), Matrix(np, N + 1));
    sol.q.assign(static_cast<std::size_t>(n), Matrix(np, N + 1));
    for (int k = 0; k <= N; ++k)
        for (int i = 0; i < n; ++i) {
            sol.Q[static_cast<std::size_t>(i)].col(k) = Qp[static_cast<std::size_t>(k)].col(i);
            sol.q[static_cast<std::size_t>(i)].col(k) = qp[static_cast<std::size_t>(k)].col(i);
        }

    // Z_k = -E_k[(q_{k+1} - E_k q_{k+1}) dW_k] / dt with E_k q_{k+1} = Pbar Q_{k+1} + pbar
    sol.Z.assign(static_cast<std::size_t>(n), Matrix(np, N));
    for (int k = 0; k < N; ++k) {
        const auto sk = static_cast<std::size_t>(k);
        const auto dW = F.dW.col(k).array();
        const Matrix ZP = reg[sk].fit(Matrix((P[sk + 1] - Pbar[sk]).array().colwise() * dW));
        const Matrix Zp = reg[sk].fit(Matrix((p[sk + 1] - pbar[sk]).array().colwise() * dW));
        for (int r = 0; r < np; ++r) {
            SmallMat Zm(n, n);
            for (int e = 0; e < nn; ++e) Zm.data()[e] = ZP(r, e);
            const SmallVec z = -(Zm * Qp[sk + 1].row(r).transpose() + Zp.row(r).transpose()) / dt;
            for (int i = 0; i < n; ++i) sol.Z[static_cast<std::size_t>(i)](r, k) = z(i);
        }
    }
    return sol;
}

McFbsdeSolution picard_solve(const MarketParams& market, const std::vector<AgentParams>& agents,
                             const FactorModel& model, const TimeGrid& grid, const McOptions& options) {
    MarketParams mk = market;
    if (model.kind == FactorModel::Kind::ConstantVol) {
        mk.vol = model.level;
    } else {
        mk.vol = CoefficientSpec::factor_vol(model);
    }
    mk.drift = CoefficientSpec::factor_drift(model.mu_base, model.mu_loading);
    const auto rep = validate(mk, agents, static_cast<int>(agents.size()));
    if (rep.verdict == Verdict::AssumptionViolated)
        throw AssumptionViolated("picard_solve: " + (rep.notes.empty() ? std::string("assumptions violated") : rep.notes.front()));
    require_grid(market, grid);
    return picard_solve(nash_problem(market, agents, model), grid, options);
}

std::vector<ResidualStats> fbsde_residual(const McFbsdeSolution& sol) {
    const int n = sol.n_players();
    const int np = sol.n_paths();
    const int N = sol.grid.n_steps();
    const double dt = sol.grid.dt();
    const auto& pr = sol.problem;
    const Matrix sig2 = sigma2_paths(pr.model, sol.factors.X);
    const Matrix mu = mu_paths(pr.model, sol.factors.X);

    std::vector<ResidualStats> out(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        const auto& pl = pr.players[static_cast<std::size_t>(i)];
        const Matrix& Qi = sol.Q[static_cast<std::size_t>(i)];
        const Matrix& qi = sol.q[static_cast<std::size_t>(i)];
        const Matrix& Zi = sol.Z[static_cast<std::size_t>(i)];

        Matrix f = -(pl.lambda / pr.b) * sig2.cwiseProduct(Qi) + pl.s_mu * mu + pl.c * qi;
        for (int j = 0; j < n; ++j)
            if (pl.w[static_cast<std::size_t>(j)] != 0.0) f += pl.w[static_cast<std::size_t>(j)] * sol.q[static_cast<std::size_t>(j)];

        std::vector<double> defects;
        defects.reserve(static_cast<std::size_t>(np) * static_cast<std::size_t>(N + 1));
        Vector acc = -pl.kappa * Qi.col(N);
        defects.resize(static_cast<std::size_t>(np));
        for (int r = 0; r < np; ++r) defects[static_cast<std::size_t>(r)] = std::abs(qi(r, N) - acc(r));
        for (int k = N - 1; k >= 0; --k) {
            acc += dt * f.col(k) + Zi.col(k).cwiseProduct(sol.factors.dW.col(k));
            for (int r = 0; r < np; ++r) defects.push_back(std::abs(qi(r, k) - acc(r)));
        }
        ResidualStats st;
        double sum = 0.0;
        for (double d : defects) {
            sum += d;
            st.max_abs = std::max(st.max_abs, d);
        }
        st.mean_abs = sum / static_cast<double>(defects.size());
        auto nth = defects.begin() + static_cast<std::ptrdiff_t>(std::ceil(0.95 * (defects.size() - 1)));
        std::nth_element(defects.begin(), nth, defects.end());
        st.p95_abs = *nth;

        for (int k = 0; k < N; ++k) {
            const Vector inc = -Zi.col(k).cwiseProduct(sol.factors.dW.col(k));
            const double m = inc.mean();
            const double sd = std::sqrt((inc.array() - m).square().sum() / std::max(1, np - 1));
            const double se = sd / std::sqrt(static_cast<double>(np));
            const double ratio = se > 0.0 ? std::abs(m) / se : (m == 0.0 ? 0.0 : INFINITY);
            st.worst_martingale_ratio = std::max(st.worst_martingale_ratio, ratio);
            if (ratio > 3.0) ++st.martingale_failures;
        }
        out[static_cast<std::size_t>(i)] = st;
    }
    return out;
}

void dump_paths_csv(const McFbsdeSolution& sol, const std::string& path, int max_paths) {
    std::ofstream os(path);
    if (!os) throw Error("cannot open " + path);
    const int np = max_paths < 0 ? sol.n_paths() : std::min(max_paths, sol.n_paths());
    const int N = sol.grid.n_steps();
    char buf[512];
    os << "path,step,t,X,dW,player,Q,q,Z\n";
    for (int r = 0; r < np; ++r)
        for (int k = 0; k <= N; ++k)
            for (int i = 0; i < sol.n_players(); ++i) {
                const auto si = static_cast<std::size_t>(i);
                if (k < N)
                    std::snprintf(buf, sizeof buf, "%d,%d,%.17g,%.17g,%.17g,%d,%.17g,%.17g,%.17g\n", r, k,
                                  sol.grid.node(k), sol.factors.X(r, k), sol.factors.dW(r, k), i + 1, sol.Q[si](r, k),
                                  sol.q[si](r, k), sol.Z[si](r, k));
                else
                    std::snprintf(buf, sizeof buf, "%d,%d,%.17g,%.17g,,%d,%.17g,%.17g,\n", r, k, sol.grid.node(k),
                                  sol.factors.X(r, k), i + 1, sol.Q[si](r, k), sol.q[si](r, k));
                os << buf;
            }
    if (!os) throw Error("write failed for " + path);
}

}  // namespace impact
