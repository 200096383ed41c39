#pragma once

#include <cstddef>
#include <vector>

namespace galev {

using Vec = std::vector<double>;

// Minimal row-major dense matrix. Weight matrices here are C x D with small
// C and D, so nothing fancier is warranted.
struct Matrix {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<double> data;

    Matrix() = default;
    Matrix(std::size_t r, std::size_t c, double fill = 0.0)
        : rows(r), cols(c), data(r * c, fill) {}

    double& operator()(std::size_t r, std::size_t c) { return data[r * cols + c]; }
    double operator()(std::size_t r, std::size_t c) const { return data[r * cols + c]; }

    bool operator==(const Matrix&) const = default;
};

double dot(const Vec& a, const Vec& b);
double l2_norm(const Vec& v);

// Euclidean-norm scaling. Zero-norm vectors pass through unchanged.
Vec l2_normalize(const Vec& v);

bool all_finite(const Vec& v);
bool all_finite(const Matrix& m);

// w * x + b, shapes (C x D) * D + C.
Vec affine(const Matrix& w, const Vec& x, const Vec& b);

// Max-subtracted softmax; output is strictly positive and sums to 1.
Vec softmax(const Vec& z);

double sigmoid(double z);
Vec sigmoid_vec(const Vec& z);

Vec mean_vector(const std::vector<Vec>& vectors);

} // namespace galev
