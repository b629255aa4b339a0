#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "risctl/common/error.hpp"

namespace risctl::nn {

// Dense row-major matrix of doubles. Column vectors are (n x 1).
struct Tensor {
    int rows = 0;
    int cols = 0;
    std::vector<double> data;

    Tensor() = default;
    Tensor(int r, int c) : rows(r), cols(c), data(static_cast<size_t>(r) * c, 0.0) {}

    static Tensor zeros(int r, int c) { return Tensor(r, c); }

    static Tensor column(const std::vector<double>& v) {
        Tensor t(static_cast<int>(v.size()), 1);
        t.data = v;
        return t;
    }

    double& at(int r, int c) { return data[static_cast<size_t>(r) * cols + c]; }
    double at(int r, int c) const { return data[static_cast<size_t>(r) * cols + c]; }

    int size() const { return rows * cols; }
    bool same_shape(const Tensor& o) const { return rows == o.rows && cols == o.cols; }

    void fill(double v) { std::fill(data.begin(), data.end(), v); }

    bool all_finite() const {
        for (double v : data)
            if (!std::isfinite(v)) return false;
        return true;
    }
};

// A named, learnable tensor. `grad` always mirrors the value shape.
struct ParamTensor {
    std::string name;
    Tensor value;
    Tensor grad;

    ParamTensor() = default;
    ParamTensor(std::string n, int r, int c)
        : name(std::move(n)), value(r, c), grad(r, c) {}

    void zero_grad() { grad.fill(0.0); }
};

}  // namespace risctl::nn
