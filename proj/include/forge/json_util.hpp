#pragma once

#include "forge/common.hpp"

#include <json.hpp>

#include <cstdio>
#include <cstdlib>
#include <string>

namespace forge {

using Json = nlohmann::json;

/// Doubles are serialized as hex-float strings ("0x1.9p+3") so that files
/// round-trip bit-exactly. Readers also accept plain JSON numbers for
/// hand-written inputs.
inline std::string to_hexfloat(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%a", v);
    return buf;
}

inline double from_hexfloat(const Json& j) {
    if (j.is_number()) return j.get<double>();
    require(j.is_string(), "expected a number or hex-float string");
    return std::strtod(j.get_ref<const std::string&>().c_str(), nullptr);
}

inline Json vector_to_json(const Vector& v) {
    Json arr = Json::array();
    for (Index i = 0; i < v.size(); ++i) arr.push_back(to_hexfloat(v[i]));
    return arr;
}

inline Vector vector_from_json(const Json& arr) {
    require(arr.is_array(), "expected an array of numbers");
    Vector v(static_cast<Index>(arr.size()));
    Index i = 0;
    for (const auto& x : arr) v[i++] = from_hexfloat(x);
    return v;
}

inline Json matrix_to_json(const Matrix& m) {
    Json rows = Json::array();
    for (Index r = 0; r < m.rows(); ++r) {
        Json row = Json::array();
        for (Index c = 0; c < m.cols(); ++c) row.push_back(to_hexfloat(m(r, c)));
        rows.push_back(std::move(row));
    }
    return rows;
}

inline Matrix matrix_from_json(const Json& rows) {
    require(rows.is_array() && !rows.empty(), "expected a non-empty array of rows");
    const Index nr = static_cast<Index>(rows.size());
    const Index nc = static_cast<Index>(rows.front().size());
    Matrix m(nr, nc);
    Index r = 0;
    for (const auto& row : rows) {
        require(static_cast<Index>(row.size()) == nc, "ragged matrix rows");
        Index c = 0;
        for (const auto& x : row) m(r, c++) = from_hexfloat(x);
        ++r;
    }
    return m;
}

} // namespace forge
