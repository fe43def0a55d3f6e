#pragma once

#include <algorithm>
#include <initializer_list>
#include <limits>
#include <stdexcept>
#include <vector>

namespace mlshe {

// Point of the Weyl chamber: coordinates stored non-increasing,
// x_1 >= x_2 >= ... >= x_n. Construction from unsorted input sorts and
// records the permutation parity (used by determinant formulas).
class WeylPoint {
  public:
    explicit WeylPoint(std::vector<double> coords) : coords_(std::move(coords)) {
        if (coords_.empty()) throw std::invalid_argument("WeylPoint: empty coordinate list");
        parity_ = sort_descending(coords_);
    }
    WeylPoint(std::initializer_list<double> coords) : WeylPoint(std::vector<double>(coords)) {}

    int n() const { return static_cast<int>(coords_.size()); }
    double operator[](int i) const { return coords_[i]; }
    const std::vector<double>& coords() const { return coords_; }
    int parity() const { return parity_; }

    double min_gap() const {
        double g = std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i + 1 < coords_.size(); ++i)
            g = std::min(g, coords_[i] - coords_[i + 1]);
        return coords_.size() > 1 ? g : std::numeric_limits<double>::infinity();
    }

    double span() const { return coords_.front() - coords_.back(); }

    bool all_equal() const { return span() == 0.0; }

  private:
    // Insertion sort into descending order; returns the permutation parity.
    static int sort_descending(std::vector<double>& v) {
        int parity = 1;
        for (std::size_t i = 1; i < v.size(); ++i) {
            double key = v[i];
            std::size_t j = i;
            while (j > 0 && v[j - 1] < key) {
                v[j] = v[j - 1];
                --j;
                parity = -parity;
            }
            v[j] = key;
        }
        return parity;
    }

    std::vector<double> coords_;
    int parity_ = 1;
};

// Vandermonde determinant prod_{i<j}(x_i - x_j); non-negative for sorted
// coordinates, 1 for n = 1 (empty product).
inline double vandermonde(const WeylPoint& x) {
    double prod = 1.0;
    for (int i = 0; i < x.n(); ++i)
        for (int j = i + 1; j < x.n(); ++j) prod *= x[i] - x[j];
    return prod;
}

inline double vandermonde(const std::vector<double>& x) {
    double prod = 1.0;
    for (std::size_t i = 0; i < x.size(); ++i)
        for (std::size_t j = i + 1; j < x.size(); ++j) prod *= x[i] - x[j];
    return prod;
}

} // namespace mlshe
