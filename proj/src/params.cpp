#include "mgarch/params.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include <json.hpp>

namespace mgarch {

namespace {

void require(bool ok, const std::string& what) {
    if (!ok) throw ConstraintViolation(what);
}

bool is_finite(const VectorXd& v) { return v.allFinite(); }

void check_distinct(const VectorXd& v, const char* name, double tol) {
    for (int i = 0; i < v.size(); ++i)
        for (int j = i + 1; j < v.size(); ++j)
            require(std::abs(v[i] - v[j]) > tol,
                    std::string(name) + " entries must be pairwise distinct");
}

}  // namespace

void ModelOrder::validate() const {
    if (m <= 0) throw ConstraintViolation("order: m must be positive");
    if (r < 0 || s < 0) throw ConstraintViolation("order: r and s must be non-negative");
    if (r + 2 * s > m) throw ConstraintViolation("order: r + 2s must not exceed m");
    if (k_window < m) throw ConstraintViolation("order: k_window must be at least m");
}

void GeneralParams::validate(double margin) const {
    order.validate();
    const int m = order.m;
    if (omega_bar.size() != m) throw DimensionMismatch("omega_bar has wrong length");
    if (lambda.size() != order.r) throw DimensionMismatch("lambda has wrong length");
    if (gamma.size() != order.s || phi.size() != order.s)
        throw DimensionMismatch("gamma/phi have wrong length");
    if (static_cast<int>(G0.size()) != order.r) throw DimensionMismatch("G0 has wrong count");
    if (static_cast<int>(G1.size()) != order.s || static_cast<int>(G2.size()) != order.s)
        throw DimensionMismatch("G1/G2 have wrong count");
    for (const auto& g : G0)
        if (g.rows() != m || g.cols() != m) throw DimensionMismatch("G0 block has wrong shape");
    for (const auto& g : G1)
        if (g.rows() != m || g.cols() != m) throw DimensionMismatch("G1 block has wrong shape");
    for (const auto& g : G2)
        if (g.rows() != m || g.cols() != m) throw DimensionMismatch("G2 block has wrong shape");
    if (Rbar.rows() != m || Rbar.cols() != m) throw DimensionMismatch("Rbar has wrong shape");

    require(is_finite(omega_bar), "omega_bar must be finite");
    for (const auto& g : G0) require(g.allFinite(), "G0 must be finite");
    for (const auto& g : G1) require(g.allFinite(), "G1 must be finite");
    for (const auto& g : G2) require(g.allFinite(), "G2 must be finite");

    const double lo = margin;
    for (int k = 0; k < order.r; ++k) {
        const double a = std::abs(lambda[k]);
        require(a > lo && a < 1.0 - lo, "lambda must satisfy 0 < |lambda| < 1");
    }
    check_distinct(lambda, "lambda", 1e-12);
    for (int k = 0; k < order.s; ++k) {
        require(gamma[k] > lo && gamma[k] < 1.0 - lo, "gamma must lie in (0, 1)");
        require(phi[k] > lo && phi[k] < M_PI - lo, "phi must lie in (0, pi)");
    }
    check_distinct(gamma, "gamma", 1e-12);

    require(beta1 >= 0.0 && beta2 >= 0.0, "beta1 and beta2 must be non-negative");
    require(beta1 + beta2 < 1.0 - lo, "beta1 + beta2 must be below 1");

    require(Rbar.allFinite(), "Rbar must be finite");
    require((Rbar - Rbar.transpose()).cwiseAbs().maxCoeff() <= 1e-12, "Rbar must be symmetric");
    for (int i = 0; i < m; ++i)
        require(std::abs(Rbar(i, i) - 1.0) <= 1e-12, "Rbar must have unit diagonal");
    for (int i = 0; i < m; ++i)
        for (int j = 0; j < i; ++j)
            require(std::abs(Rbar(i, j)) < 1.0, "Rbar off-diagonals must lie in (-1, 1)");
    Eigen::SelfAdjointEigenSolver<MatrixXd> es(Rbar);
    require(es.eigenvalues().minCoeff() > 0.0, "Rbar must be positive definite");
}

void LowRankParams::validate(double margin) const {
    order.validate();
    const int m = order.m;
    if (omega_bar.size() != m) throw DimensionMismatch("omega_bar has wrong length");
    if (lambda.size() != order.r) throw DimensionMismatch("lambda has wrong length");
    if (gamma.size() != order.s || phi.size() != order.s)
        throw DimensionMismatch("gamma/phi have wrong length");
    if (static_cast<int>(g0.size()) != order.r) throw DimensionMismatch("g0 has wrong count");
    if (static_cast<int>(g1.size()) != order.s || static_cast<int>(g2.size()) != order.s)
        throw DimensionMismatch("g1/g2 have wrong count");
    auto check_vec = [m](const VectorXd& v, const char* name) {
        if (v.size() != m) throw DimensionMismatch(std::string(name) + " factor has wrong length");
        require(v.allFinite(), std::string(name) + " factor must be finite");
    };
    for (const auto& pair : g0)
        for (const auto& v : pair) check_vec(v, "g0");
    for (const auto& quad : g1)
        for (const auto& v : quad) check_vec(v, "g1");
    for (const auto& quad : g2)
        for (const auto& v : quad) check_vec(v, "g2");

    // Scalar blocks share the unrestricted constraints; reuse them through a
    // shell with zero coefficient matrices.
    GeneralParams shell;
    shell.order = order;
    shell.omega_bar = omega_bar;
    shell.lambda = lambda;
    shell.gamma = gamma;
    shell.phi = phi;
    shell.G0.assign(order.r, MatrixXd::Zero(m, m));
    shell.G1.assign(order.s, MatrixXd::Zero(m, m));
    shell.G2.assign(order.s, MatrixXd::Zero(m, m));
    shell.beta1 = beta1;
    shell.beta2 = beta2;
    shell.Rbar = Rbar;
    shell.validate(margin);
}

std::pair<int, int> vechsec_coords(int m, int idx) {
    int col = 0;
    int remaining = idx;
    while (remaining >= m - 1 - col) {
        remaining -= m - 1 - col;
        ++col;
        if (col >= m) throw IndexOutOfRange("vechsec index out of range");
    }
    return {col + 1 + remaining, col};
}

VectorXd pack(const GeneralParams& p) {
    const ModelOrder& o = p.order;
    const int m = o.m;
    VectorXd v(o.dim_general());
    int pos = 0;
    v.segment(pos, m) = p.omega_bar;
    pos += m;
    v.segment(pos, o.r) = p.lambda;
    pos += o.r;
    v.segment(pos, o.s) = p.gamma;
    pos += o.s;
    v.segment(pos, o.s) = p.phi;
    pos += o.s;
    for (const auto& g : p.G0) {
        v.segment(pos, m * m) = Eigen::Map<const VectorXd>(g.data(), m * m);
        pos += m * m;
    }
    for (const auto& g : p.G1) {
        v.segment(pos, m * m) = Eigen::Map<const VectorXd>(g.data(), m * m);
        pos += m * m;
    }
    for (const auto& g : p.G2) {
        v.segment(pos, m * m) = Eigen::Map<const VectorXd>(g.data(), m * m);
        pos += m * m;
    }
    v[pos++] = p.beta1;
    v[pos++] = p.beta2;
    for (int j = 0; j < m; ++j)
        for (int i = j + 1; i < m; ++i) v[pos++] = p.Rbar(i, j);
    return v;
}

GeneralParams unpack_unchecked(const VectorXd& v, const ModelOrder& order) {
    order.validate();
    const int m = order.m;
    if (v.size() != order.dim_general())
        throw DimensionMismatch("packed vector has length " + std::to_string(v.size()) +
                                ", expected " + std::to_string(order.dim_general()));
    GeneralParams p;
    p.order = order;
    int pos = 0;
    p.omega_bar = v.segment(pos, m);
    pos += m;
    p.lambda = v.segment(pos, order.r);
    pos += order.r;
    p.gamma = v.segment(pos, order.s);
    pos += order.s;
    p.phi = v.segment(pos, order.s);
    pos += order.s;
    auto take_matrix = [&]() {
        MatrixXd g(m, m);
        Eigen::Map<VectorXd>(g.data(), m * m) = v.segment(pos, m * m);
        pos += m * m;
        return g;
    };
    for (int k = 0; k < order.r; ++k) p.G0.push_back(take_matrix());
    for (int k = 0; k < order.s; ++k) p.G1.push_back(take_matrix());
    for (int k = 0; k < order.s; ++k) p.G2.push_back(take_matrix());
    p.beta1 = v[pos++];
    p.beta2 = v[pos++];
    p.Rbar = MatrixXd::Identity(m, m);
    for (int j = 0; j < m; ++j)
        for (int i = j + 1; i < m; ++i) {
            p.Rbar(i, j) = v[pos];
            p.Rbar(j, i) = v[pos];
            ++pos;
        }
    return p;
}

GeneralParams unpack(const VectorXd& v, const ModelOrder& order) {
    GeneralParams p = unpack_unchecked(v, order);
    p.validate();
    return p;
}

VectorXd pack(const LowRankParams& p) {
    const ModelOrder& o = p.order;
    const int m = o.m;
    VectorXd v(o.dim_lowrank());
    int pos = 0;
    v.segment(pos, m) = p.omega_bar;
    pos += m;
    v.segment(pos, o.r) = p.lambda;
    pos += o.r;
    v.segment(pos, o.s) = p.gamma;
    pos += o.s;
    v.segment(pos, o.s) = p.phi;
    pos += o.s;
    for (const auto& pair : p.g0)
        for (const auto& f : pair) {
            v.segment(pos, m) = f;
            pos += m;
        }
    for (const auto& quad : p.g1)
        for (const auto& f : quad) {
            v.segment(pos, m) = f;
            pos += m;
        }
    for (const auto& quad : p.g2)
        for (const auto& f : quad) {
            v.segment(pos, m) = f;
            pos += m;
        }
    v[pos++] = p.beta1;
    v[pos++] = p.beta2;
    for (int j = 0; j < m; ++j)
        for (int i = j + 1; i < m; ++i) v[pos++] = p.Rbar(i, j);
    return v;
}

LowRankParams unpack_lowrank_unchecked(const VectorXd& v, const ModelOrder& order) {
    order.validate();
    const int m = order.m;
    if (v.size() != order.dim_lowrank())
        throw DimensionMismatch("packed factor vector has length " + std::to_string(v.size()) +
                                ", expected " + std::to_string(order.dim_lowrank()));
    LowRankParams p;
    p.order = order;
    int pos = 0;
    p.omega_bar = v.segment(pos, m);
    pos += m;
    p.lambda = v.segment(pos, order.r);
    pos += order.r;
    p.gamma = v.segment(pos, order.s);
    pos += order.s;
    p.phi = v.segment(pos, order.s);
    pos += order.s;
    auto take_vec = [&]() {
        VectorXd f = v.segment(pos, m);
        pos += m;
        return f;
    };
    for (int k = 0; k < order.r; ++k) p.g0.push_back({take_vec(), take_vec()});
    for (int k = 0; k < order.s; ++k) p.g1.push_back({take_vec(), take_vec(), take_vec(), take_vec()});
    for (int k = 0; k < order.s; ++k) p.g2.push_back({take_vec(), take_vec(), take_vec(), take_vec()});
    p.beta1 = v[pos++];
    p.beta2 = v[pos++];
    p.Rbar = MatrixXd::Identity(m, m);
    for (int j = 0; j < m; ++j)
        for (int i = j + 1; i < m; ++i) {
            p.Rbar(i, j) = v[pos];
            p.Rbar(j, i) = v[pos];
            ++pos;
        }
    return p;
}

LowRankParams unpack_lowrank(const VectorXd& v, const ModelOrder& order) {
    LowRankParams p = unpack_lowrank_unchecked(v, order);
    p.validate();
    return p;
}

GeneralParams theta_of_vartheta(const LowRankParams& lr) {
    GeneralParams p;
    p.order = lr.order;
    p.omega_bar = lr.omega_bar;
    p.lambda = lr.lambda;
    p.gamma = lr.gamma;
    p.phi = lr.phi;
    for (const auto& pair : lr.g0) p.G0.push_back(pair[0] * pair[1].transpose());
    for (const auto& quad : lr.g1)
        p.G1.push_back(quad[0] * quad[1].transpose() + quad[2] * quad[3].transpose());
    for (const auto& quad : lr.g2)
        p.G2.push_back(quad[0] * quad[1].transpose() + quad[2] * quad[3].transpose());
    p.beta1 = lr.beta1;
    p.beta2 = lr.beta2;
    p.Rbar = lr.Rbar;
    return p;
}

GeneralParams canonicalize(const GeneralParams& p, double tol) {
    for (int i = 0; i < p.lambda.size(); ++i)
        for (int j = i + 1; j < p.lambda.size(); ++j)
            if (std::abs(p.lambda[i] - p.lambda[j]) <= tol)
                throw DuplicateEigenvalue("two real decay rates coincide within tolerance");
    for (int i = 0; i < p.gamma.size(); ++i)
        for (int j = i + 1; j < p.gamma.size(); ++j)
            if (std::abs(p.gamma[i] - p.gamma[j]) <= tol)
                throw DuplicateEigenvalue("two moduli coincide within tolerance");

    GeneralParams out = p;
    std::vector<int> ord(static_cast<std::size_t>(p.order.r));
    std::iota(ord.begin(), ord.end(), 0);
    std::sort(ord.begin(), ord.end(), [&](int a, int b) { return p.lambda[a] > p.lambda[b]; });
    for (int k = 0; k < p.order.r; ++k) {
        out.lambda[k] = p.lambda[ord[k]];
        out.G0[k] = p.G0[ord[k]];
    }
    std::vector<int> ords(static_cast<std::size_t>(p.order.s));
    std::iota(ords.begin(), ords.end(), 0);
    std::sort(ords.begin(), ords.end(), [&](int a, int b) { return p.gamma[a] > p.gamma[b]; });
    for (int k = 0; k < p.order.s; ++k) {
        out.gamma[k] = p.gamma[ords[k]];
        out.phi[k] = p.phi[ords[k]];
        out.G1[k] = p.G1[ords[k]];
        out.G2[k] = p.G2[ords[k]];
    }
    return out;
}

LowRankParams normalize_factors(const LowRankParams& lr) {
    LowRankParams out = lr;
    auto fix_pair = [](VectorXd& left, VectorXd& right) {
        const double norm = left.norm();
        if (norm == 0.0) return;
        left /= norm;
        right *= norm;
        for (int i = 0; i < left.size(); ++i) {
            if (left[i] != 0.0) {
                if (left[i] < 0.0) {
                    left = -left;
                    right = -right;
                }
                break;
            }
        }
    };
    for (auto& pair : out.g0) fix_pair(pair[0], pair[1]);
    for (auto& quad : out.g1) {
        fix_pair(quad[0], quad[1]);
        fix_pair(quad[2], quad[3]);
    }
    for (auto& quad : out.g2) {
        fix_pair(quad[0], quad[1]);
        fix_pair(quad[2], quad[3]);
    }
    return out;
}

namespace {

nlohmann::json order_to_json(const ModelOrder& o) {
    return {{"m", o.m}, {"r", o.r}, {"s", o.s}, {"k_window", o.k_window}};
}

ModelOrder order_from_json(const nlohmann::json& j) {
    return ModelOrder(j.at("m").get<int>(), j.at("r").get<int>(), j.at("s").get<int>(),
                      j.at("k_window").get<int>());
}

}  // namespace

std::string params_to_json(const GeneralParams& p) {
    const VectorXd v = pack(p);
    nlohmann::json j;
    j["order"] = order_to_json(p.order);
    j["theta"] = std::vector<double>(v.data(), v.data() + v.size());
    return j.dump(2);
}

GeneralParams params_from_json(const std::string& text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("invalid parameter JSON: ") + e.what());
    }
    const ModelOrder order = order_from_json(j.at("order"));
    const auto values = j.at("theta").get<std::vector<double>>();
    VectorXd v = Eigen::Map<const VectorXd>(values.data(), static_cast<int>(values.size()));
    return unpack(v, order);
}

std::string params_to_json(const LowRankParams& p) {
    const VectorXd v = pack(p);
    nlohmann::json j;
    j["order"] = order_to_json(p.order);
    j["vartheta"] = std::vector<double>(v.data(), v.data() + v.size());
    const VectorXd theta = pack(theta_of_vartheta(p));
    j["theta"] = std::vector<double>(theta.data(), theta.data() + theta.size());
    return j.dump(2);
}

LowRankParams lowrank_from_json(const std::string& text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("invalid parameter JSON: ") + e.what());
    }
    const ModelOrder order = order_from_json(j.at("order"));
    const auto values = j.at("vartheta").get<std::vector<double>>();
    VectorXd v = Eigen::Map<const VectorXd>(values.data(), static_cast<int>(values.size()));
    return unpack_lowrank(v, order);
}

}  // namespace mgarch
