#pragma once

#include <array>

namespace msgfem {

struct TriangleQuadPoint {
  std::array<double, 3> bary;
  double weight; ///< fraction of the triangle area
};

/// Seven-point Dunavant rule, exact for polynomials of degree 5.
inline constexpr std::array<TriangleQuadPoint, 7> dunavant5 = {{
    {{1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0}, 0.225},
    {{0.05971587178976982, 0.47014206410511511, 0.47014206410511511}, 0.13239415278850619},
    {{0.47014206410511511, 0.05971587178976982, 0.47014206410511511}, 0.13239415278850619},
    {{0.47014206410511511, 0.47014206410511511, 0.05971587178976982}, 0.13239415278850619},
    {{0.79742698535308720, 0.10128650732345633, 0.10128650732345633}, 0.12593918054482714},
    {{0.10128650732345633, 0.79742698535308720, 0.10128650732345633}, 0.12593918054482714},
    {{0.10128650732345633, 0.10128650732345633, 0.79742698535308720}, 0.12593918054482714},
}};

} // namespace msgfem
