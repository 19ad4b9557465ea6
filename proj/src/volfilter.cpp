#include "mgarch/volfilter.hpp"

#include <cmath>

namespace mgarch {

MatrixXd phi_matrix(const GeneralParams& p, int i) {
    if (i < 1) throw IndexOutOfRange("phi_matrix: lag index must be >= 1");
    const int m = p.order.m;
    MatrixXd out = MatrixXd::Zero(m, m);
    for (int k = 0; k < p.order.r; ++k)
        out += std::pow(p.lambda[k], i - 1) * p.G0[static_cast<std::size_t>(k)];
    for (int k = 0; k < p.order.s; ++k) {
        const double w = (i - 1) * p.phi[k];
        const double g = std::pow(p.gamma[k], i - 1);
        out += g * std::cos(w) * p.G1[static_cast<std::size_t>(k)];
        out += g * std::sin(w) * p.G2[static_cast<std::size_t>(k)];
    }
    return out;
}

MatrixXd log_sq_returns(const MatrixXd& panel, double floor_abs, long* floored_count) {
    if (!(floor_abs > 0.0)) throw ConstraintViolation("log_sq_returns: floor must be positive");
    if (!panel.allFinite()) throw NonFiniteError("log_sq_returns: panel contains NaN or infinity");
    const double floor_sq = floor_abs * floor_abs;
    long floored = 0;
    MatrixXd out(panel.rows(), panel.cols());
    for (Eigen::Index j = 0; j < panel.cols(); ++j)
        for (Eigen::Index i = 0; i < panel.rows(); ++i) {
            double sq = panel(i, j) * panel(i, j);
            if (sq < floor_sq) {
                sq = floor_sq;
                ++floored;
            }
            out(i, j) = std::log(sq);
        }
    if (floored_count) *floored_count = floored;
    return out;
}

VolState::VolState(const ModelOrder& order) : order_(order) {
    order_.validate();
    reset();
}

void VolState::reset() {
    s_.assign(static_cast<std::size_t>(order_.r), VectorXd::Zero(order_.m));
    a_.assign(static_cast<std::size_t>(order_.s), VectorXd::Zero(order_.m));
    b_.assign(static_cast<std::size_t>(order_.s), VectorXd::Zero(order_.m));
}

VectorXd VolState::log_h(const GeneralParams& p) const {
    VectorXd out = p.omega_bar;
    for (int k = 0; k < order_.r; ++k) out.noalias() += p.G0[static_cast<std::size_t>(k)] * s_[static_cast<std::size_t>(k)];
    for (int k = 0; k < order_.s; ++k) {
        out.noalias() += p.G1[static_cast<std::size_t>(k)] * a_[static_cast<std::size_t>(k)];
        out.noalias() += p.G2[static_cast<std::size_t>(k)] * b_[static_cast<std::size_t>(k)];
    }
    return out;
}

void VolState::advance(const GeneralParams& p, const VectorXd& x) {
    for (int k = 0; k < order_.r; ++k) {
        auto& s = s_[static_cast<std::size_t>(k)];
        s = x + p.lambda[k] * s;
    }
    for (int k = 0; k < order_.s; ++k) {
        auto& a = a_[static_cast<std::size_t>(k)];
        auto& b = b_[static_cast<std::size_t>(k)];
        const double c = std::cos(p.phi[k]), sn = std::sin(p.phi[k]), g = p.gamma[k];
        const VectorXd a_new = x + g * (c * a - sn * b);
        b = g * (sn * a + c * b);
        a = a_new;
    }
}

VolPath run_filter(const GeneralParams& p, const MatrixXd& log_sq, const MatrixXd& panel) {
    const int m = p.order.m;
    const Eigen::Index n = log_sq.rows();
    if (log_sq.cols() != m || panel.rows() != n || panel.cols() != m)
        throw DimensionMismatch("run_filter: panel/log_sq shapes inconsistent with order");
    VolPath path;
    path.log_h.resize(n, m);
    path.eps.resize(n, m);
    VolState state(p.order);
    for (Eigen::Index t = 0; t < n; ++t) {
        const VectorXd lh = state.log_h(p);
        if (!lh.allFinite() || lh.cwiseAbs().maxCoeff() > 700.0)
            throw OverflowError("run_filter: log variance left the stable range at t=" +
                                std::to_string(t + 1));
        path.log_h.row(t) = lh.transpose();
        path.eps.row(t) = panel.row(t).cwiseQuotient((0.5 * lh).array().exp().matrix().transpose());
        state.advance(p, log_sq.row(t).transpose());
    }
    return path;
}

DeltaCoord delta_coord(const ModelOrder& order, int idx) {
    const int m = order.m, mm = m * m;
    if (idx < 0 || idx >= order.dim_delta())
        throw IndexOutOfRange("delta_coord: index out of range");
    DeltaCoord c{};
    if (idx < m) {
        c.kind = DeltaCoord::Kind::Omega;
        c.row = idx;
        return c;
    }
    idx -= m;
    if (idx < order.r) {
        c.kind = DeltaCoord::Kind::Lambda;
        c.block = idx;
        return c;
    }
    idx -= order.r;
    if (idx < order.s) {
        c.kind = DeltaCoord::Kind::Gamma;
        c.block = idx;
        return c;
    }
    idx -= order.s;
    if (idx < order.s) {
        c.kind = DeltaCoord::Kind::Phi;
        c.block = idx;
        return c;
    }
    idx -= order.s;
    if (idx < order.r * mm) {
        c.kind = DeltaCoord::Kind::G0;
        c.block = idx / mm;
        c.col = (idx % mm) / m;
        c.row = (idx % mm) % m;
        return c;
    }
    idx -= order.r * mm;
    if (idx < order.s * mm) {
        c.kind = DeltaCoord::Kind::G1;
        c.block = idx / mm;
        c.col = (idx % mm) / m;
        c.row = (idx % mm) % m;
        return c;
    }
    idx -= order.s * mm;
    c.kind = DeltaCoord::Kind::G2;
    c.block = idx / mm;
    c.col = (idx % mm) / m;
    c.row = (idx % mm) % m;
    return c;
}

VolDerivState::VolDerivState(const ModelOrder& order) : order_(order) {
    order_.validate();
    reset();
}

void VolDerivState::reset() {
    const auto r = static_cast<std::size_t>(order_.r);
    const auto s = static_cast<std::size_t>(order_.s);
    const VectorXd zero = VectorXd::Zero(order_.m);
    s_.assign(r, zero);
    sd_.assign(r, zero);
    sdd_.assign(r, zero);
    a_.assign(s, zero);
    b_.assign(s, zero);
    ag_.assign(s, zero);
    bg_.assign(s, zero);
    agg_.assign(s, zero);
    bgg_.assign(s, zero);
}

void VolDerivState::advance(const GeneralParams& p, const VectorXd& x) {
    for (int k = 0; k < order_.r; ++k) {
        const auto i = static_cast<std::size_t>(k);
        const double lam = p.lambda[k];
        // Differentiating s' = x + lam*s gives the derivative recursions.
        sdd_[i] = 2.0 * sd_[i] + lam * sdd_[i];
        sd_[i] = s_[i] + lam * sd_[i];
        s_[i] = x + lam * s_[i];
    }
    for (int k = 0; k < order_.s; ++k) {
        const auto i = static_cast<std::size_t>(k);
        const double g = p.gamma[k];
        const double c = std::cos(p.phi[k]), sn = std::sin(p.phi[k]);
        const VectorXd rot_a = c * a_[i] - sn * b_[i];
        const VectorXd rot_b = sn * a_[i] + c * b_[i];
        const VectorXd rot_ag = c * ag_[i] - sn * bg_[i];
        const VectorXd rot_bg = sn * ag_[i] + c * bg_[i];
        const VectorXd rot_agg = c * agg_[i] - sn * bgg_[i];
        const VectorXd rot_bgg = sn * agg_[i] + c * bgg_[i];
        agg_[i] = 2.0 * rot_ag + g * rot_agg;
        bgg_[i] = 2.0 * rot_bg + g * rot_bgg;
        ag_[i] = rot_a + g * rot_ag;
        bg_[i] = rot_b + g * rot_bg;
        a_[i] = x + g * rot_a;
        b_[i] = g * rot_b;
    }
}

VectorXd VolDerivState::log_h(const GeneralParams& p) const {
    VectorXd out = p.omega_bar;
    for (int k = 0; k < order_.r; ++k) out.noalias() += p.G0[static_cast<std::size_t>(k)] * s_[static_cast<std::size_t>(k)];
    for (int k = 0; k < order_.s; ++k) {
        out.noalias() += p.G1[static_cast<std::size_t>(k)] * a_[static_cast<std::size_t>(k)];
        out.noalias() += p.G2[static_cast<std::size_t>(k)] * b_[static_cast<std::size_t>(k)];
    }
    return out;
}

void VolDerivState::fill_dlogh(const GeneralParams& p, MatrixXd& U) const {
    const int m = order_.m, mm = m * m;
    U.setZero();
    U.topLeftCorner(m, m).setIdentity();
    int row = m;
    for (int k = 0; k < order_.r; ++k)
        U.row(row++) = (p.G0[static_cast<std::size_t>(k)] * sd_[static_cast<std::size_t>(k)]).transpose();
    for (int k = 0; k < order_.s; ++k)
        U.row(row++) = (p.G1[static_cast<std::size_t>(k)] * ag_[static_cast<std::size_t>(k)] +
                        p.G2[static_cast<std::size_t>(k)] * bg_[static_cast<std::size_t>(k)])
                           .transpose();
    for (int k = 0; k < order_.s; ++k)
        U.row(row++) = (p.gamma[k] * (p.G2[static_cast<std::size_t>(k)] * ag_[static_cast<std::size_t>(k)] -
                                      p.G1[static_cast<std::size_t>(k)] * bg_[static_cast<std::size_t>(k)]))
                           .transpose();
    // Matrix coordinate (b, c) of block k moves component b by the c-th entry
    // of the block's level accumulator.
    for (int k = 0; k < order_.r; ++k) {
        const VectorXd& acc = s_[static_cast<std::size_t>(k)];
        for (int c = 0; c < m; ++c)
            for (int b = 0; b < m; ++b) U(row + c * m + b, b) = acc[c];
        row += mm;
    }
    for (int k = 0; k < order_.s; ++k) {
        const VectorXd& acc = a_[static_cast<std::size_t>(k)];
        for (int c = 0; c < m; ++c)
            for (int b = 0; b < m; ++b) U(row + c * m + b, b) = acc[c];
        row += mm;
    }
    for (int k = 0; k < order_.s; ++k) {
        const VectorXd& acc = b_[static_cast<std::size_t>(k)];
        for (int c = 0; c < m; ++c)
            for (int b = 0; b < m; ++b) U(row + c * m + b, b) = acc[c];
        row += mm;
    }
}

VectorXd VolDerivState::d2_logh(const GeneralParams& p, int di, int dj) const {
    const int m = order_.m;
    DeltaCoord ci = delta_coord(order_, di);
    DeltaCoord cj = delta_coord(order_, dj);
    using Kind = DeltaCoord::Kind;
    // Order the pair so the scalar coordinate (if any) comes first.
    auto rank = [](Kind k) {
        switch (k) {
            case Kind::Omega: return 0;
            case Kind::Lambda: return 1;
            case Kind::Gamma: return 2;
            case Kind::Phi: return 3;
            default: return 4;
        }
    };
    if (rank(ci.kind) > rank(cj.kind)) std::swap(ci, cj);
    VectorXd out = VectorXd::Zero(m);
    auto unit_scaled = [m](int row, double value) {
        VectorXd v = VectorXd::Zero(m);
        v[row] = value;
        return v;
    };

    if (ci.kind == Kind::Lambda && cj.kind == Kind::Lambda && ci.block == cj.block)
        return p.G0[static_cast<std::size_t>(ci.block)] * sdd_[static_cast<std::size_t>(ci.block)];
    if (ci.kind == Kind::Lambda && cj.kind == Kind::G0 && ci.block == cj.block)
        return unit_scaled(cj.row, sd_[static_cast<std::size_t>(ci.block)][cj.col]);

    if (ci.kind == Kind::Gamma && cj.kind == Kind::Gamma && ci.block == cj.block)
        return p.G1[static_cast<std::size_t>(ci.block)] * agg_[static_cast<std::size_t>(ci.block)] +
               p.G2[static_cast<std::size_t>(ci.block)] * bgg_[static_cast<std::size_t>(ci.block)];
    if (ci.kind == Kind::Gamma && cj.kind == Kind::Phi && ci.block == cj.block) {
        const auto k = static_cast<std::size_t>(ci.block);
        const double g = p.gamma[ci.block];
        const VectorXd u = ag_[k] + g * agg_[k];
        const VectorXd v = bg_[k] + g * bgg_[k];
        return p.G2[k] * u - p.G1[k] * v;
    }
    if (ci.kind == Kind::Gamma && cj.kind == Kind::G1 && ci.block == cj.block)
        return unit_scaled(cj.row, ag_[static_cast<std::size_t>(ci.block)][cj.col]);
    if (ci.kind == Kind::Gamma && cj.kind == Kind::G2 && ci.block == cj.block)
        return unit_scaled(cj.row, bg_[static_cast<std::size_t>(ci.block)][cj.col]);

    if (ci.kind == Kind::Phi && cj.kind == Kind::Phi && ci.block == cj.block) {
        const auto k = static_cast<std::size_t>(ci.block);
        const double g = p.gamma[ci.block];
        const VectorXd u = ag_[k] + g * agg_[k];
        const VectorXd v = bg_[k] + g * bgg_[k];
        return -g * (p.G1[k] * u + p.G2[k] * v);
    }
    if (ci.kind == Kind::Phi && cj.kind == Kind::G1 && ci.block == cj.block)
        return unit_scaled(cj.row, -p.gamma[ci.block] * bg_[static_cast<std::size_t>(ci.block)][cj.col]);
    if (ci.kind == Kind::Phi && cj.kind == Kind::G2 && ci.block == cj.block)
        return unit_scaled(cj.row, p.gamma[ci.block] * ag_[static_cast<std::size_t>(ci.block)][cj.col]);

    return out;
}

}  // namespace mgarch
