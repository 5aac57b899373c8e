#include "spark/numkit/params.hpp"

#include <algorithm>

#include "spark/error.hpp"

namespace spark::numkit {

ParamEntry& ParameterStore::add(std::string name, std::size_t rows, std::size_t cols, bool trainable) {
  require(!name.empty(), ErrorKind::kInvalidInput, "parameter name must be nonempty");
  if (!(rows > 0 && cols > 0)) fail(ErrorKind::kInvalidInput, "parameter '" + name + "' has an empty shape");
  if (!(!contains(name))) fail(ErrorKind::kInvalidInput, "duplicate parameter name '" + name + "'");
  ParamEntry entry;
  entry.name = name;
  entry.rows = rows;
  entry.cols = cols;
  entry.value.assign(rows * cols, 0.0);
  entry.grad.assign(rows * cols, 0.0);
  entry.trainable = trainable;
  auto [it, inserted] = entries_.emplace(std::move(name), std::move(entry));
  return it->second;
}

bool ParameterStore::contains(std::string_view name) const { return entries_.find(name) != entries_.end(); }

ParamEntry& ParameterStore::at(std::string_view name) {
  auto it = entries_.find(name);
  if (it == entries_.end()) fail(ErrorKind::kNotFound, "unknown parameter '" + std::string(name) + "'");
  return it->second;
}

const ParamEntry& ParameterStore::at(std::string_view name) const {
  auto it = entries_.find(name);
  if (it == entries_.end()) fail(ErrorKind::kNotFound, "unknown parameter '" + std::string(name) + "'");
  return it->second;
}

std::size_t ParameterStore::parameter_count() const {
  std::size_t n = 0;
  for (const auto& [_, e] : entries_) n += e.size();
  return n;
}

std::size_t ParameterStore::trainable_count() const {
  std::size_t n = 0;
  for (const auto& [_, e] : entries_) {
    if (e.trainable) n += e.size();
  }
  return n;
}

void ParameterStore::zero_grad() {
  for (auto& [_, e] : entries_) std::fill(e.grad.begin(), e.grad.end(), 0.0);
}

void ParameterStore::check_compatible(const ParameterStore& other) const {
  require(entries_.size() == other.entries_.size(), ErrorKind::kInvalidInput,
          "parameter stores differ in entry count");
  auto a = entries_.begin();
  auto b = other.entries_.begin();
  for (; a != entries_.end(); ++a, ++b) {
    if (!(a->first == b->first)) {
      fail(ErrorKind::kInvalidInput, "parameter name mismatch: '" + a->first + "' vs '" + b->first + "'");
    }
    if (!(a->second.rows == b->second.rows && a->second.cols == b->second.cols)) {
      fail(ErrorKind::kInvalidInput, "parameter shape mismatch for '" + a->first + "'");
    }
  }
}

}  // namespace spark::numkit
