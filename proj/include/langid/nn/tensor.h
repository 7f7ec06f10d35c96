// langid/tensor.h

// Copyright 2026  The langid authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// THIS CODE IS PROVIDED *AS IS* BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY
// KIND, EITHER EXPRESS OR IMPLIED, INCLUDING WITHOUT LIMITATION ANY IMPLIED
// WARRANTIES OR CONDITIONS OF TITLE, FITNESS FOR A PARTICULAR PURPOSE,
// MERCHANTABLITY OR NON-INFRINGEMENT.
// See the Apache 2 License for the specific language governing permissions and
// limitations under the License.

#ifndef LANGID_NN_TENSOR_H_
#define LANGID_NN_TENSOR_H_

#include <algorithm>
#include <cmath>
#include <map>
#include <string>
#include <vector>

#include "langid/common.h"

namespace langid {

/// Dense row-major array with a shape.
template <typename T>
struct Tensor {
  std::vector<int> shape;
  std::vector<T> data;

  Tensor() = default;
  explicit Tensor(std::vector<int> s) : shape(std::move(s)) {
    size_t n = 1;
    for (int d : shape) n *= static_cast<size_t>(d);
    data.assign(n, T(0));
  }
  size_t size() const { return data.size(); }
};

/// Sequence of frames, frame-major: n rows of c channels.
template <typename T>
struct Frames {
  int n = 0;
  int c = 0;
  std::vector<T> v;

  Frames() = default;
  Frames(int frames, int channels)
      : n(frames), c(channels), v(static_cast<size_t>(frames) * channels, T(0)) {}

  T *row(int t) { return v.data() + static_cast<size_t>(t) * c; }
  const T *row(int t) const { return v.data() + static_cast<size_t>(t) * c; }
  T &at(int t, int ch) { return v[static_cast<size_t>(t) * c + ch]; }
  T at(int t, int ch) const { return v[static_cast<size_t>(t) * c + ch]; }
};

template <typename T>
using Batch = std::vector<Frames<T>>;

/// Named parameter store with a parallel gradient store. Insertion order is
/// the canonical order (checkpoints, optimizer state, enumeration).
template <typename T>
class ParameterSet {
 public:
  struct Entry {
    std::string name;
    Tensor<T> value;
    Tensor<T> grad;
    bool trainable = true;
  };

  int Add(const std::string &name, std::vector<int> shape, bool trainable = true) {
    Check(index_.count(name) == 0, "duplicate parameter name ", name);
    Entry e;
    e.name = name;
    e.value = Tensor<T>(shape);
    e.grad = Tensor<T>(std::move(shape));
    e.trainable = trainable;
    entries_.push_back(std::move(e));
    index_[name] = static_cast<int>(entries_.size()) - 1;
    return static_cast<int>(entries_.size()) - 1;
  }

  int IndexOf(const std::string &name) const {
    auto it = index_.find(name);
    if (it == index_.end()) Fail("no parameter named ", name);
    return it->second;
  }
  bool Has(const std::string &name) const { return index_.count(name) != 0; }

  T *value(int i) { return entries_[i].value.data.data(); }
  const T *value(int i) const { return entries_[i].value.data.data(); }
  T *grad(int i) { return entries_[i].grad.data.data(); }

  Entry &entry(int i) { return entries_[i]; }
  const Entry &entry(int i) const { return entries_[i]; }
  Entry &entry(const std::string &name) { return entries_[IndexOf(name)]; }
  const Entry &entry(const std::string &name) const {
    return entries_[IndexOf(name)];
  }
  size_t size() const { return entries_.size(); }
  std::vector<Entry> &entries() { return entries_; }
  const std::vector<Entry> &entries() const { return entries_; }

  void ZeroGrad() {
    for (auto &e : entries_) std::fill(e.grad.data.begin(), e.grad.data.end(), T(0));
  }

  size_t NumElements() const {
    size_t n = 0;
    for (const auto &e : entries_) n += e.value.size();
    return n;
  }

  bool AllFinite() const {
    for (const auto &e : entries_)
      for (T x : e.value.data)
        if (!std::isfinite(x)) return false;
    return true;
  }

  /// Copies values by name from a store with possibly different scalar type.
  template <typename U>
  void CopyValuesFrom(const ParameterSet<U> &other) {
    for (auto &e : entries_) {
      const auto &o = other.entry(e.name);
      Check(o.value.shape == e.value.shape, "shape mismatch for ", e.name);
      for (size_t i = 0; i < e.value.size(); ++i)
        e.value.data[i] = static_cast<T>(o.value.data[i]);
    }
  }

 private:
  std::vector<Entry> entries_;
  std::map<std::string, int> index_;
};

}  // namespace langid

#endif  // LANGID_NN_TENSOR_H_
