#pragma once

#include "affwalk/common.hpp"
#include "affwalk/linalg.hpp"

namespace affwalk::testutil {

inline Matrix random_matrix(Rng& rng, int rows, int cols) {
    Matrix m(rows, cols);
    for (int i = 0; i < rows; ++i)
        for (int j = 0; j < cols; ++j) m(i, j) = rng.uniform(-1.0, 1.0);
    return m;
}

/// Random square matrix rejected until comfortably invertible.
inline Matrix random_invertible(Rng& rng, int d) {
    for (;;) {
        Matrix m = random_matrix(rng, d, d);
        Vec s = singular_values(m);
        if (s.back() > 1e-3 * s.front()) return m;
    }
}

} // namespace affwalk::testutil
