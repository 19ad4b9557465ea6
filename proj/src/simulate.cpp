#include "mgarch/simulate.hpp"

#include <cmath>
#include <random>

#include "mgarch/corrfilter.hpp"
#include "mgarch/rng.hpp"
#include "mgarch/stationarity.hpp"
#include "mgarch/volfilter.hpp"

namespace mgarch {

InnovationSpec InnovationSpec::parse(const std::string& name) {
    InnovationSpec spec;
    if (name == "normal" || name == "gaussian") {
        spec.kind = Kind::Gaussian;
        return spec;
    }
    if (!name.empty() && name[0] == 't') {
        spec.kind = Kind::StudentT;
        std::string num = name.substr(1);
        if (!num.empty() && num.front() == '(' && num.back() == ')')
            num = num.substr(1, num.size() - 2);
        try {
            spec.nu = std::stod(num);
        } catch (...) {
            throw UnknownName("unknown innovation family: " + name);
        }
        if (!(spec.nu > 2.0))
            throw ConstraintViolation("Student-t innovations need nu > 2 for unit variance");
        return spec;
    }
    throw UnknownName("unknown innovation family: " + name);
}

std::string InnovationSpec::name() const {
    if (kind == Kind::Gaussian) return "normal";
    return "t(" + std::to_string(nu) + ")";
}

SimResult simulate_path(const GeneralParams& p, int n, int burn, const InnovationSpec& dist,
                        std::uint64_t seed, bool allow_nonstationary, double log_floor) {
    p.validate();
    if (n < 1) throw ConstraintViolation("simulate: n must be positive");
    if (burn < p.order.k_window)
        throw ConstraintViolation("simulate: burn must be at least k_window");

    SimResult result;
    const StationarityReport st = check_stationarity(p);
    result.diag.stationarity_min_sum = st.min_sum;
    result.diag.stationarity_ok = st.satisfied;
    if (!st.satisfied && !allow_nonstationary)
        throw ConstraintViolation(
            "simulate: stationarity condition not verified (pass allow_nonstationary to force)");

    const int m = p.order.m;
    std::mt19937_64 eng = make_engine(seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    std::student_t_distribution<double> student(dist.nu);
    const double t_scale =
        dist.kind == InnovationSpec::Kind::StudentT ? std::sqrt((dist.nu - 2.0) / dist.nu) : 1.0;
    auto draw_eta = [&](VectorXd& eta) {
        if (dist.kind == InnovationSpec::Kind::Gaussian)
            for (int i = 0; i < m; ++i) eta[i] = gauss(eng);
        else
            for (int i = 0; i < m; ++i) eta[i] = t_scale * student(eng);
    };

    VolState vol(p.order);
    CorrState corr(p.order);
    corr.reset(p);

    const double floor_sq = log_floor * log_floor;
    const int total = burn + n;
    result.panel.resize(n, m);
    result.eps.resize(n, m);
    VectorXd eta(m), eps(m), y(m), x(m);
    for (int t = 0; t < total; ++t) {
        const VectorXd lnh = vol.log_h(p);
        if (!lnh.allFinite() || lnh.cwiseAbs().maxCoeff() > 700.0)
            throw OverflowError("simulate: explosive path at step " + std::to_string(t + 1));
        result.diag.max_abs_log_h = std::max(result.diag.max_abs_log_h, lnh.cwiseAbs().maxCoeff());

        const MatrixXd psi = corr.psi();
        MatrixXd R = step_R(psi, p.beta1, p.beta2, p.Rbar, corr.R_prev());
        Eigen::LLT<MatrixXd> llt(R);
        if (llt.info() != Eigen::Success) {
            R = ensure_pd(R, 1e-10).first;
            llt.compute(R);
            if (llt.info() != Eigen::Success)
                throw OverflowError("simulate: correlation matrix lost definiteness");
        }

        draw_eta(eta);
        eps.noalias() = MatrixXd(llt.matrixL()) * eta;
        const VectorXd dvec = (0.5 * lnh).array().exp();
        y = dvec.cwiseProduct(eps);
        if (t >= burn) {
            result.panel.row(t - burn) = y.transpose();
            result.eps.row(t - burn) = eps.transpose();
        }

        for (int i = 0; i < m; ++i) {
            double sq = y[i] * y[i];
            if (sq < floor_sq) {
                sq = floor_sq;
                ++result.diag.floored_logs;
            }
            x[i] = std::log(sq);
        }
        corr.push(eps);
        corr.set_R_prev(R);
        vol.advance(p, x);
    }
    return result;
}

namespace {

MatrixXd ones_correlation(int m, double offdiag) {
    MatrixXd r = MatrixXd::Constant(m, m, offdiag);
    for (int i = 0; i < m; ++i) r(i, i) = 1.0;
    return r;
}

GeneralParams base_dgp(int m, int r, int s, double omega) {
    GeneralParams p;
    p.order = ModelOrder(m, r, s);
    p.omega_bar = VectorXd::Constant(m, omega);
    p.lambda.resize(r);
    p.gamma.resize(s);
    p.phi.resize(s);
    p.beta1 = 0.1;
    p.beta2 = 0.8;
    p.Rbar = ones_correlation(m, 0.5);
    return p;
}

}  // namespace

GeneralParams dgp_catalog(const std::string& name, std::uint64_t dgp5_seed) {
    if (name == "DGP1") {
        GeneralParams p = base_dgp(2, 1, 0, 1.45);
        p.lambda << 0.8;
        Eigen::Vector2d u(1.0, 1.0), v(0.045, 0.045);
        p.G0.push_back(u * v.transpose());
        p.validate();
        return p;
    }
    if (name == "DGP2") {
        GeneralParams p = base_dgp(2, 2, 0, 1.45);
        p.lambda << 0.8, -0.8;
        Eigen::Vector2d u1(1.0, 1.0), v1(0.045, 0.045);
        Eigen::Vector2d u2(1.0, -1.0), v2(0.045, -0.045);
        p.G0.push_back(u1 * v1.transpose());
        p.G0.push_back(u2 * v2.transpose());
        p.validate();
        return p;
    }
    if (name == "DGP3") {
        GeneralParams p = base_dgp(2, 0, 1, 1.45);
        p.gamma << 0.8;
        p.phi << 0.7;
        Eigen::Vector2d a1(0.8, 0.6), b1(0.064, 0.062);
        Eigen::Vector2d a2(-0.6, 0.8), b2(0.002, 0.016);
        p.G1.push_back(a1 * b1.transpose() + a2 * b2.transpose());
        Eigen::Vector2d c1(0.8, 0.6), d1(0.002, 0.016);
        Eigen::Vector2d c2(0.6, -0.8), d2(0.064, 0.062);
        p.G2.push_back(c1 * d1.transpose() + c2 * d2.transpose());
        p.validate();
        return p;
    }
    if (name == "DGP4") {
        GeneralParams p = base_dgp(5, 1, 0, 1.45);
        p.lambda << 0.8;
        VectorXd u(5), v(5);
        u << 1.00, 0.96, 0.92, 0.88, 0.86;
        v << 0.025, 0.0255, 0.0265, 0.028, 0.03;
        p.G0.push_back(u * v.transpose());
        p.validate();
        return p;
    }
    if (name == "DGP5") {
        GeneralParams p = base_dgp(20, 1, 0, 1.3);
        p.lambda << 0.5;
        std::mt19937_64 eng = make_engine(dgp5_seed);
        std::uniform_real_distribution<double> left(0.5, 0.6), right(0.03, 0.05);
        VectorXd u(20), v(20);
        for (int i = 0; i < 20; ++i) u[i] = left(eng);
        for (int i = 0; i < 20; ++i) v[i] = right(eng);
        p.G0.push_back(u * v.transpose());
        p.validate();
        return p;
    }
    throw UnknownName("unknown catalog entry: " + name);
}

}  // namespace mgarch
