#include "galev/vector_math.hpp"

#include <algorithm>
#include <cmath>

#include "galev/errors.hpp"

namespace galev {

double dot(const Vec& a, const Vec& b) {
    if (a.size() != b.size()) {
        throw ValidationError("dot: length mismatch (" + std::to_string(a.size()) +
                              " vs " + std::to_string(b.size()) + ")");
    }
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

double l2_norm(const Vec& v) {
    double s = 0.0;
    for (double x : v) s += x * x;
    return std::sqrt(s);
}

Vec l2_normalize(const Vec& v) {
    const double n = l2_norm(v);
    if (n <= 1e-12) return v;
    Vec out(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) out[i] = v[i] / n;
    return out;
}

bool all_finite(const Vec& v) {
    return std::all_of(v.begin(), v.end(), [](double x) { return std::isfinite(x); });
}

bool all_finite(const Matrix& m) {
    return std::all_of(m.data.begin(), m.data.end(),
                       [](double x) { return std::isfinite(x); });
}

Vec affine(const Matrix& w, const Vec& x, const Vec& b) {
    if (w.cols != x.size() || w.rows != b.size()) {
        throw ValidationError("affine: shape mismatch");
    }
    Vec out(w.rows);
    for (std::size_t r = 0; r < w.rows; ++r) {
        double s = b[r];
        const double* row = &w.data[r * w.cols];
        for (std::size_t c = 0; c < w.cols; ++c) s += row[c] * x[c];
        out[r] = s;
    }
    return out;
}

Vec softmax(const Vec& z) {
    if (z.empty()) throw ValidationError("softmax: empty input");
    const double m = *std::max_element(z.begin(), z.end());
    Vec out(z.size());
    double sum = 0.0;
    for (std::size_t i = 0; i < z.size(); ++i) {
        out[i] = std::exp(z[i] - m);
        sum += out[i];
    }
    for (double& x : out) x /= sum;
    return out;
}

double sigmoid(double z) {
    if (z >= 0.0) {
        return 1.0 / (1.0 + std::exp(-z));
    }
    const double e = std::exp(z);
    return e / (1.0 + e);
}

Vec sigmoid_vec(const Vec& z) {
    Vec out(z.size());
    for (std::size_t i = 0; i < z.size(); ++i) out[i] = sigmoid(z[i]);
    return out;
}

Vec mean_vector(const std::vector<Vec>& vectors) {
    if (vectors.empty()) throw ValidationError("mean_vector: empty input");
    Vec out(vectors.front().size(), 0.0);
    for (const Vec& v : vectors) {
        if (v.size() != out.size()) throw ValidationError("mean_vector: ragged input");
        for (std::size_t i = 0; i < out.size(); ++i) out[i] += v[i];
    }
    const double inv = 1.0 / static_cast<double>(vectors.size());
    for (double& x : out) x *= inv;
    return out;
}

} // namespace galev
