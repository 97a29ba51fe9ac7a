#pragma once

// JSON forms of the domain types.  Angles are radians.  Fock objects carry
// interleaved [re, im, re, im, ...] arrays, row-major for matrices.  The
// types validate their invariants on construction, so they have no default
// state and deserialize through adl_serializer.

#include <complex>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "obliq/fock.hpp"
#include "obliq/husimi.hpp"
#include "obliq/sl2.hpp"
#include "obliq/states.hpp"

namespace obliq::detail {

inline std::vector<double> interleave(const ComplexVector& v) {
    std::vector<double> out;
    out.reserve(2 * v.size());
    for (Eigen::Index i = 0; i < v.size(); ++i) {
        out.push_back(v(i).real());
        out.push_back(v(i).imag());
    }
    return out;
}

inline ComplexVector deinterleave(const std::vector<double>& d) {
    if (d.size() % 2 != 0)
        throw std::invalid_argument("deinterleave: odd number of components");
    ComplexVector v(d.size() / 2);
    for (size_t i = 0; i < d.size() / 2; ++i) v(i) = Complex(d[2 * i], d[2 * i + 1]);
    return v;
}

}  // namespace obliq::detail

namespace nlohmann {

template <>
struct adl_serializer<obliq::CanonicalParams> {
    static void to_json(json& j, const obliq::CanonicalParams& p) {
        j = {{"theta", p.theta}, {"phi", p.phi}, {"lambda", p.lambda}};
    }
    static obliq::CanonicalParams from_json(const json& j) {
        return {j.at("theta").get<double>(), j.at("phi").get<double>(),
                j.at("lambda").get<double>()};
    }
};

template <>
struct adl_serializer<obliq::Sl2Matrix> {
    static void to_json(json& j, const obliq::Sl2Matrix& m) {
        j = {{"m", {{m.m11, m.m12}, {m.m21, m.m22}}}};
    }
    static obliq::Sl2Matrix from_json(const json& j) {
        const auto& rows = j.at("m");
        return {rows.at(0).at(0).get<double>(), rows.at(0).at(1).get<double>(),
                rows.at(1).at(0).get<double>(), rows.at(1).at(1).get<double>()};
    }
};

template <>
struct adl_serializer<obliq::MetricTensor> {
    static void to_json(json& j, const obliq::MetricTensor& g) {
        j = {{"a", g.a}, {"b", g.b}, {"c", g.c}};
    }
    static obliq::MetricTensor from_json(const json& j) {
        return {j.at("a").get<double>(), j.at("b").get<double>(), j.at("c").get<double>()};
    }
};

template <>
struct adl_serializer<obliq::GaussianState> {
    static void to_json(json& j, const obliq::GaussianState& s) {
        j = {{"mean", {s.mean_x, s.mean_p}},
             {"cov", {{s.cov_xx, s.cov_xp}, {s.cov_xp, s.cov_pp}}}};
    }
    static obliq::GaussianState from_json(const json& j) {
        const auto& mean = j.at("mean");
        const auto& cov = j.at("cov");
        return {mean.at(0).get<double>(), mean.at(1).get<double>(),
                cov.at(0).at(0).get<double>(), cov.at(0).at(1).get<double>(),
                cov.at(1).at(1).get<double>()};
    }
};

template <>
struct adl_serializer<obliq::FockVector> {
    static void to_json(json& j, const obliq::FockVector& v) {
        j = {{"dim", v.dim()}, {"coeffs", obliq::detail::interleave(v.coeffs)}};
    }
    static obliq::FockVector from_json(const json& j) {
        const int dim = j.at("dim").get<int>();
        obliq::ComplexVector c =
            obliq::detail::deinterleave(j.at("coeffs").get<std::vector<double>>());
        if (static_cast<int>(c.size()) != dim)
            throw std::invalid_argument("FockVector JSON: dim does not match coeffs length");
        return obliq::FockVector(std::move(c));
    }
};

template <>
struct adl_serializer<obliq::FockDensity> {
    static void to_json(json& j, const obliq::FockDensity& rho) {
        const int dim = rho.dim();
        obliq::ComplexVector flat(static_cast<Eigen::Index>(dim) * dim);
        for (int r = 0; r < dim; ++r)
            for (int c = 0; c < dim; ++c)
                flat(static_cast<Eigen::Index>(r) * dim + c) = rho.rho(r, c);
        j = {{"dim", dim}, {"matrix", obliq::detail::interleave(flat)}};
    }
    static obliq::FockDensity from_json(const json& j) {
        const int dim = j.at("dim").get<int>();
        obliq::ComplexVector flat =
            obliq::detail::deinterleave(j.at("matrix").get<std::vector<double>>());
        if (static_cast<Eigen::Index>(flat.size()) != static_cast<Eigen::Index>(dim) * dim)
            throw std::invalid_argument("FockDensity JSON: dim does not match matrix length");
        obliq::ComplexMatrix m(dim, dim);
        for (int r = 0; r < dim; ++r)
            for (int c = 0; c < dim; ++c)
                m(r, c) = flat(static_cast<Eigen::Index>(r) * dim + c);
        return obliq::FockDensity(std::move(m));
    }
};

}  // namespace nlohmann

namespace obliq {

/// Sidecar describing an emitted Q_M grid.
inline nlohmann::json husimi_sidecar(const HusimiResult& r) {
    return {{"metric", nlohmann::json(r.metric)},
            {"method", to_string(r.method)},
            {"integral", r.integral()},
            {"min_value", r.min_value()}};
}

}  // namespace obliq
