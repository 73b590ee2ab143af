#pragma once

#include <cstddef>
#include <vector>

namespace nashseek {

// Minimal dense row-major matrix. Coalition graphs and tracker blocks are
// tiny (n_i x n_i), so no linear-algebra dependency is warranted.
struct Matrix {
    int rows = 0;
    int cols = 0;
    std::vector<double> data;

    Matrix() = default;
    Matrix(int r, int c, double fill = 0.0)
        : rows(r), cols(c), data(static_cast<std::size_t>(r) * c, fill) {}

    double& at(int r, int c) { return data[static_cast<std::size_t>(r) * cols + c]; }
    double at(int r, int c) const { return data[static_cast<std::size_t>(r) * cols + c]; }

    bool square() const { return rows == cols; }

    bool operator==(const Matrix&) const = default;
};

}  // namespace nashseek
