#include "mgarch/transforms.hpp"

#include <algorithm>
#include <cmath>

namespace mgarch {

namespace {

double sigmoid(double x) {
    if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
    const double e = std::exp(x);
    return e / (1.0 + e);
}

double to_interval(double x, double lo, double hi) { return lo + (hi - lo) * sigmoid(x); }

double from_interval(double v, double lo, double hi) {
    double u = (v - lo) / (hi - lo);
    u = std::clamp(u, 1e-12, 1.0 - 1e-12);
    return std::log(u / (1.0 - u));
}

double interval_slope(double x, double lo, double hi) {
    const double s = sigmoid(x);
    return (hi - lo) * s * (1.0 - s);
}

// Softmax pair onto { b1, b2 >= 0, b1 + b2 <= 1 - eta }.
void decode_beta(double x1, double x2, double eta, double& b1, double& b2) {
    const double mx = std::max({0.0, x1, x2});
    const double e0 = std::exp(-mx), e1 = std::exp(x1 - mx), e2 = std::exp(x2 - mx);
    const double z = e0 + e1 + e2;
    b1 = (1.0 - eta) * e1 / z;
    b2 = (1.0 - eta) * e2 / z;
}

void encode_beta(double b1, double b2, double eta, double& x1, double& x2) {
    double p1 = std::max(b1 / (1.0 - eta), 1e-12);
    double p2 = std::max(b2 / (1.0 - eta), 1e-12);
    const double p0 = std::max(1.0 - p1 - p2, 1e-12);
    x1 = std::log(p1 / p0);
    x2 = std::log(p2 / p0);
}

// Rows of the hyperspherical Cholesky factor; row i uses angles ang[i][0..i-1].
MatrixXd chol_from_angles(int m, const std::vector<std::vector<double>>& ang) {
    MatrixXd L = MatrixXd::Zero(m, m);
    L(0, 0) = 1.0;
    for (int i = 1; i < m; ++i) {
        double prod = 1.0;
        for (int j = 0; j < i; ++j) {
            L(i, j) = std::cos(ang[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)]) * prod;
            prod *= std::sin(ang[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)]);
        }
        L(i, i) = prod;
    }
    return L;
}

struct Layout {
    int m, r, s;
    int pos_lambda, pos_gamma, pos_phi, pos_mid, mid_len, pos_beta, pos_corr, n_corr;
};

Layout layout_of(const TransformSpec& spec) {
    const int m = spec.order.m, r = spec.order.r, s = spec.order.s;
    Layout lay{};
    lay.m = m;
    lay.r = r;
    lay.s = s;
    lay.pos_lambda = m;
    lay.pos_gamma = m + r;
    lay.pos_phi = m + r + s;
    lay.pos_mid = m + r + 2 * s;
    lay.mid_len = spec.lowrank ? 2 * m * (r + 4 * s) : (r + 2 * s) * m * m;
    lay.pos_beta = lay.pos_mid + lay.mid_len;
    lay.pos_corr = lay.pos_beta + 2;
    lay.n_corr = m * (m - 1) / 2;
    return lay;
}

// Shared by decode_general and decode_lowrank: maps the unconstrained vector
// to a packed natural-coordinate vector of the same layout.
VectorXd decode_packed(const TransformSpec& spec, const VectorXd& x) {
    const Layout lay = layout_of(spec);
    const double eta = spec.eta;
    if (x.size() != spec.dim()) throw DimensionMismatch("decode: coordinate vector has wrong length");
    if (static_cast<int>(spec.lambda_sign.size()) != lay.r)
        throw DimensionMismatch("decode: lambda_sign has wrong length");
    VectorXd v = x;
    for (int k = 0; k < lay.r; ++k)
        v[lay.pos_lambda + k] =
            spec.lambda_sign[static_cast<std::size_t>(k)] * to_interval(x[lay.pos_lambda + k], eta, 1.0 - eta);
    for (int k = 0; k < lay.s; ++k) {
        v[lay.pos_gamma + k] = to_interval(x[lay.pos_gamma + k], eta, 1.0 - eta);
        v[lay.pos_phi + k] = to_interval(x[lay.pos_phi + k], eta, M_PI - eta);
    }
    decode_beta(x[lay.pos_beta], x[lay.pos_beta + 1], eta, v[lay.pos_beta], v[lay.pos_beta + 1]);

    std::vector<std::vector<double>> ang(static_cast<std::size_t>(lay.m));
    for (int i = 1; i < lay.m; ++i) {
        ang[static_cast<std::size_t>(i)].resize(static_cast<std::size_t>(i));
        for (int j = 0; j < i; ++j)
            ang[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] =
                to_interval(x[lay.pos_corr + vechsec_index(lay.m, i, j)], eta, M_PI - eta);
    }
    const MatrixXd L = chol_from_angles(lay.m, ang);
    const MatrixXd Rbar = L * L.transpose();
    for (int j = 0; j < lay.m; ++j)
        for (int i = j + 1; i < lay.m; ++i) v[lay.pos_corr + vechsec_index(lay.m, i, j)] = Rbar(i, j);
    return v;
}

VectorXd encode_packed(const TransformSpec& spec, const VectorXd& v) {
    const Layout lay = layout_of(spec);
    const double eta = spec.eta;
    VectorXd x = v;
    for (int k = 0; k < lay.r; ++k)
        x[lay.pos_lambda + k] = from_interval(std::abs(v[lay.pos_lambda + k]), eta, 1.0 - eta);
    for (int k = 0; k < lay.s; ++k) {
        x[lay.pos_gamma + k] = from_interval(v[lay.pos_gamma + k], eta, 1.0 - eta);
        x[lay.pos_phi + k] = from_interval(v[lay.pos_phi + k], eta, M_PI - eta);
    }
    encode_beta(v[lay.pos_beta], v[lay.pos_beta + 1], eta, x[lay.pos_beta], x[lay.pos_beta + 1]);

    // Recover angles row by row from the Cholesky factor of Rbar.
    MatrixXd Rbar = MatrixXd::Identity(lay.m, lay.m);
    for (int j = 0; j < lay.m; ++j)
        for (int i = j + 1; i < lay.m; ++i) {
            Rbar(i, j) = v[lay.pos_corr + vechsec_index(lay.m, i, j)];
            Rbar(j, i) = Rbar(i, j);
        }
    Eigen::LLT<MatrixXd> llt(Rbar);
    if (llt.info() != Eigen::Success)
        throw ConstraintViolation("encode: baseline correlation is not positive definite");
    const MatrixXd L = llt.matrixL();
    for (int i = 1; i < lay.m; ++i) {
        double prod = 1.0;
        for (int j = 0; j < i; ++j) {
            double c = L(i, j) / prod;
            c = std::clamp(c, -1.0 + 1e-12, 1.0 - 1e-12);
            double theta = std::acos(c);
            theta = std::clamp(theta, eta * (1.0 + 1e-9) + 1e-300, M_PI - eta * (1.0 + 1e-9));
            x[lay.pos_corr + vechsec_index(lay.m, i, j)] = from_interval(theta, eta, M_PI - eta);
            prod *= std::sin(theta);
        }
    }
    return x;
}

}  // namespace

int vechsec_index(int m, int i, int j) {
    if (!(i > j && j >= 0 && i < m)) throw IndexOutOfRange("vechsec_index: need i > j within range");
    int base = 0;
    for (int c = 0; c < j; ++c) base += m - 1 - c;
    return base + (i - j - 1);
}

GeneralParams decode_general(const TransformSpec& spec, const VectorXd& x) {
    if (spec.lowrank) throw ConstraintViolation("decode_general: spec is low-rank");
    return unpack_unchecked(decode_packed(spec, x), spec.order);
}

VectorXd encode_general(const TransformSpec& spec, const GeneralParams& p) {
    if (spec.lowrank) throw ConstraintViolation("encode_general: spec is low-rank");
    return encode_packed(spec, pack(p));
}

LowRankParams decode_lowrank(const TransformSpec& spec, const VectorXd& x) {
    if (!spec.lowrank) throw ConstraintViolation("decode_lowrank: spec is not low-rank");
    return unpack_lowrank_unchecked(decode_packed(spec, x), spec.order);
}

VectorXd encode_lowrank(const TransformSpec& spec, const LowRankParams& p) {
    if (!spec.lowrank) throw ConstraintViolation("encode_lowrank: spec is not low-rank");
    return encode_packed(spec, pack(p));
}

VectorXd pullback_gradient(const TransformSpec& spec, const VectorXd& x, const VectorXd& grad_theta) {
    const Layout lay = layout_of(spec);
    const double eta = spec.eta;
    if (x.size() != spec.dim() || grad_theta.size() != spec.dim())
        throw DimensionMismatch("pullback_gradient: size mismatch");
    VectorXd g = grad_theta;
    for (int k = 0; k < lay.r; ++k)
        g[lay.pos_lambda + k] = grad_theta[lay.pos_lambda + k] *
                                spec.lambda_sign[static_cast<std::size_t>(k)] *
                                interval_slope(x[lay.pos_lambda + k], eta, 1.0 - eta);
    for (int k = 0; k < lay.s; ++k) {
        g[lay.pos_gamma + k] =
            grad_theta[lay.pos_gamma + k] * interval_slope(x[lay.pos_gamma + k], eta, 1.0 - eta);
        g[lay.pos_phi + k] =
            grad_theta[lay.pos_phi + k] * interval_slope(x[lay.pos_phi + k], eta, M_PI - eta);
    }
    {
        const double x1 = x[lay.pos_beta], x2 = x[lay.pos_beta + 1];
        const double mx = std::max({0.0, x1, x2});
        const double e0 = std::exp(-mx), e1 = std::exp(x1 - mx), e2 = std::exp(x2 - mx);
        const double z = e0 + e1 + e2;
        const double p1 = e1 / z, p2 = e2 / z;
        const double g1 = grad_theta[lay.pos_beta], g2 = grad_theta[lay.pos_beta + 1];
        const double scale = 1.0 - eta;
        g[lay.pos_beta] = scale * (g1 * p1 * (1.0 - p1) - g2 * p1 * p2);
        g[lay.pos_beta + 1] = scale * (g2 * p2 * (1.0 - p2) - g1 * p1 * p2);
    }

    // Correlation block: chain through Rbar = L L' where only row i of L
    // depends on row i's angles, and rows keep unit norm (diagonal fixed).
    std::vector<std::vector<double>> ang(static_cast<std::size_t>(lay.m));
    for (int i = 1; i < lay.m; ++i) {
        ang[static_cast<std::size_t>(i)].resize(static_cast<std::size_t>(i));
        for (int j = 0; j < i; ++j)
            ang[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] =
                to_interval(x[lay.pos_corr + vechsec_index(lay.m, i, j)], eta, M_PI - eta);
    }
    const MatrixXd L = chol_from_angles(lay.m, ang);
    for (int i = 1; i < lay.m; ++i) {
        for (int l = 0; l < i; ++l) {
            const double theta = ang[static_cast<std::size_t>(i)][static_cast<std::size_t>(l)];
            // dL(i, :) / d theta_{i,l}
            VectorXd drow = VectorXd::Zero(lay.m);
            double prod = 1.0;
            for (int u = 0; u < l; ++u) prod *= std::sin(ang[static_cast<std::size_t>(i)][static_cast<std::size_t>(u)]);
            drow[l] = -std::sin(theta) * prod;
            const double cot = std::cos(theta) / std::sin(theta);
            for (int j = l + 1; j < i; ++j) drow[j] = L(i, j) * cot;
            drow[i] = L(i, i) * cot;
            double acc = 0.0;
            for (int k = 0; k < lay.m; ++k) {
                if (k == i) continue;
                const double dRik = drow.dot(L.row(k));
                const int hi = std::max(i, k), lo = std::min(i, k);
                acc += grad_theta[lay.pos_corr + vechsec_index(lay.m, hi, lo)] * dRik;
            }
            g[lay.pos_corr + vechsec_index(lay.m, i, l)] =
                acc * interval_slope(x[lay.pos_corr + vechsec_index(lay.m, i, l)], eta, M_PI - eta);
        }
    }
    return g;
}

}  // namespace mgarch
