#pragma once

#include <cassert>
#include <cstdint>
#include <vector>

namespace osaom {

// Dense directed adjacency matrix with a structurally empty diagonal.
class BinaryMatrix {
  public:
    BinaryMatrix() = default;
    explicit BinaryMatrix(int n) : n_(n), v_(static_cast<std::size_t>(n) * n, 0) {}

    int n() const { return n_; }

    bool operator()(int i, int j) const { return v_[idx(i, j)] != 0; }

    void set(int i, int j, bool value) {
        assert(i != j);
        v_[idx(i, j)] = value ? 1 : 0;
    }

    void toggle(int i, int j) { v_[idx(i, j)] ^= 1; }

    int out_degree(int i) const {
        int d = 0;
        for (int j = 0; j < n_; ++j) d += v_[idx(i, j)];
        return d;
    }

    int in_degree(int j) const {
        int d = 0;
        for (int i = 0; i < n_; ++i) d += v_[idx(i, j)];
        return d;
    }

    int tie_count() const {
        int c = 0;
        for (auto b : v_) c += b;
        return c;
    }

    bool operator==(const BinaryMatrix&) const = default;

  private:
    std::size_t idx(int i, int j) const { return static_cast<std::size_t>(i) * n_ + j; }

    int n_ = 0;
    std::vector<std::uint8_t> v_;
};

// Observed integer matrix with missing entries (-1). Holds 0/1 adjacency
// after dichotomization and 0..7 ordinal ratings before it.
class ObservedMatrix {
  public:
    static constexpr int kMissing = -1;

    ObservedMatrix() = default;
    explicit ObservedMatrix(int n) : n_(n), v_(static_cast<std::size_t>(n) * n, 0) {}

    int n() const { return n_; }
    int at(int i, int j) const { return v_[idx(i, j)]; }
    bool missing(int i, int j) const { return v_[idx(i, j)] == kMissing; }

    void set(int i, int j, int value) {
        assert(value >= kMissing && value <= 127);
        v_[idx(i, j)] = static_cast<std::int8_t>(value);
    }

  private:
    std::size_t idx(int i, int j) const { return static_cast<std::size_t>(i) * n_ + j; }

    int n_ = 0;
    std::vector<std::int8_t> v_;
};

// Dense real dyadic weights (covariates), zero diagonal by convention.
class RealMatrix {
  public:
    RealMatrix() = default;
    explicit RealMatrix(int n) : n_(n), v_(static_cast<std::size_t>(n) * n, 0.0) {}

    int n() const { return n_; }
    double operator()(int i, int j) const { return v_[idx(i, j)]; }
    void set(int i, int j, double value) { v_[idx(i, j)] = value; }

  private:
    std::size_t idx(int i, int j) const { return static_cast<std::size_t>(i) * n_ + j; }

    int n_ = 0;
    std::vector<double> v_;
};

}  // namespace osaom
