#pragma once

#include <string>

#include "polycycle/expr.hpp"
#include "polycycle/saddle.hpp"

namespace testing_fields {

inline polycycle::PolynomialField field(const std::string& fx, const std::string& fy,
                                        const polycycle::Binding& b = {}) {
    std::vector<std::string> names;
    for (const auto& [k, v] : b) names.push_back(k);
    return {polycycle::instantiate(polycycle::parse_expression(fx, names), b),
            polycycle::instantiate(polycycle::parse_expression(fy, names), b)};
}

inline const char* kGameX = "x*(x-1)*(-1 - (l3-1)*x + y - (l1-l3)*x*y + l1*y^2)";
inline const char* kGameY = "y*(y-1)*(l2 - (l2+m1)*x - (l2-1)*y + (m1-1)*x^2 + (l2-l4)*x*y)";

inline polycycle::Binding game_mu0(double m1 = 1625.0 / 162.0) {
    return {{"l1", 8.0 / 27.0}, {"l2", 1.5}, {"l3", 1.5}, {"l4", 1.5}, {"m1", m1}};
}

inline polycycle::PolynomialField game_field(const polycycle::Binding& b = game_mu0()) {
    return field(kGameX, kGameY, b);
}

/// Corners of the unit square in traversal order p1..p4.
inline const polycycle::Point kSquare[4] = {{0, 1}, {0, 0}, {1, 0}, {1, 1}};

inline polycycle::LocalChart game_chart(int i, const polycycle::Binding& b = game_mu0()) {
    const int k = i - 1;
    return polycycle::normalize_saddle(game_field(b), kSquare[k], kSquare[(k + 3) % 4], kSquare[(k + 1) % 4]);
}

}  // namespace testing_fields
