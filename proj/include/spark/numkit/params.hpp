#pragma once

#include <cstddef>
#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace spark::numkit {

// A named trainable tensor. Vectors are stored with cols == 1.
struct ParamEntry {
  std::string name;
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> value;
  std::vector<double> grad;
  bool trainable = true;

  std::size_t size() const { return value.size(); }
};

// Flat registry of model parameters. Iteration order is lexicographic by
// name, which fixes the summation order of every reduction over the store.
// Copying a store is a deep copy (see snapshot()).
class ParameterStore {
 public:
  ParamEntry& add(std::string name, std::size_t rows, std::size_t cols, bool trainable = true);

  bool contains(std::string_view name) const;
  ParamEntry& at(std::string_view name);
  const ParamEntry& at(std::string_view name) const;

  std::size_t entry_count() const { return entries_.size(); }
  std::size_t parameter_count() const;
  std::size_t trainable_count() const;

  void zero_grad();
  ParameterStore snapshot() const { return *this; }

  // Fails unless both stores have identical names and shapes.
  void check_compatible(const ParameterStore& other) const;

  auto begin() { return entries_.begin(); }
  auto end() { return entries_.end(); }
  auto begin() const { return entries_.begin(); }
  auto end() const { return entries_.end(); }

 private:
  std::map<std::string, ParamEntry, std::less<>> entries_;
};

}  // namespace spark::numkit
