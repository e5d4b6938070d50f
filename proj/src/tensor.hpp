#pragma once

#include <cstddef>
#include <stdexcept>
#include <vector>

namespace toric {

// Row-major float32 tensor. Shapes are fixed at construction; layers reuse
// buffers by assignment.
class Tensor {
public:
    Tensor() = default;
    explicit Tensor(std::vector<std::size_t> shape) : shape_(std::move(shape)) {
        std::size_t n = 1;
        for (auto d : shape_) n *= d;
        data_.assign(n, 0.0f);
    }
    static Tensor scalar(float v) {
        Tensor t(std::vector<std::size_t>{1});
        t.data_[0] = v;
        return t;
    }

    const std::vector<std::size_t>& shape() const { return shape_; }
    std::size_t rank() const { return shape_.size(); }
    std::size_t numel() const { return data_.size(); }
    std::size_t dim(std::size_t i) const { return shape_.at(i); }
    float* data() { return data_.data(); }
    const float* data() const { return data_.data(); }
    float& operator[](std::size_t i) { return data_[i]; }
    float operator[](std::size_t i) const { return data_[i]; }
    std::vector<float>& vec() { return data_; }
    const std::vector<float>& vec() const { return data_; }
    void fill(float v) { data_.assign(data_.size(), v); }
    bool same_shape(const Tensor& o) const { return shape_ == o.shape_; }

private:
    std::vector<std::size_t> shape_;
    std::vector<float> data_;
};

}  // namespace toric
