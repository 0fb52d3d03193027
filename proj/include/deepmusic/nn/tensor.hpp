#pragma once

#include <cstddef>
#include <vector>

namespace dm::nn {

/// NHWC shape; fully connected outputs are (n, 1, 1, width).
struct Shape {
  int n = 0, h = 0, w = 0, c = 0;

  std::size_t per_sample() const { return static_cast<std::size_t>(h) * w * c; }
  std::size_t size() const { return static_cast<std::size_t>(n) * per_sample(); }
  Shape with_batch(int batch) const { return {batch, h, w, c}; }
  bool operator==(const Shape&) const = default;
};

template <typename T>
struct Tensor4 {
  Shape shape;
  std::vector<T> data;

  Tensor4() = default;
  explicit Tensor4(Shape s) : shape(s), data(s.size(), T(0)) {}

  void resize(Shape s) {
    shape = s;
    data.assign(s.size(), T(0));
  }
  T& at(int n, int y, int x, int ch) { return data[index(n, y, x, ch)]; }
  const T& at(int n, int y, int x, int ch) const { return data[index(n, y, x, ch)]; }
  std::size_t index(int n, int y, int x, int ch) const {
    return ((static_cast<std::size_t>(n) * shape.h + y) * shape.w + x) * shape.c + ch;
  }
  T* sample(int n) { return data.data() + n * shape.per_sample(); }
  const T* sample(int n) const { return data.data() + n * shape.per_sample(); }
};

enum class Mode { Train, Infer };

}  // namespace dm::nn
