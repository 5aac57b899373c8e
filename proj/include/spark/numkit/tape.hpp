#pragma once

#include <cstddef>
#include <deque>
#include <functional>
#include <span>
#include <string_view>
#include <vector>

#include "spark/numkit/params.hpp"

namespace spark::numkit {

class Tape;

// Handle to a node recorded on a Tape.
struct Var {
  Tape* tape = nullptr;
  std::size_t id = 0;

  std::span<const double> value() const;
  std::size_t size() const;
  double scalar() const;
};

// Reverse-mode recording of vector-valued primitives.
//
// Parameter leaves alias the ParameterStore entry directly: their value is
// read in place and their gradient accumulates into ParamEntry::grad. The
// store must outlive the tape and must not gain or lose entries while the
// tape is alive. Frozen entries, and every entry when gradients are
// disabled, become constants.
class Tape {
 public:
  // Receives the tape and the output node; accumulates into input grads.
  using BackwardFn = std::function<void(Tape&, Var)>;

  explicit Tape(bool grad_enabled = true) : grad_enabled_(grad_enabled) {}
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  bool grad_enabled() const { return grad_enabled_; }

  Var constant(std::vector<double> value);
  Var parameter(ParameterStore& store, std::string_view name);

  std::span<const double> value(Var v) const { return nodes_[v.id].value; }
  std::span<const double> grad(Var v) const { return nodes_[v.id].grad; }
  std::span<double> grad_mut(Var v) { return nodes_[v.id].grad; }
  bool requires_grad(Var v) const { return nodes_[v.id].requires_grad; }
  std::size_t node_count() const { return nodes_.size(); }

  // Records an op output. `fn` runs during backward only if the output
  // requires grad, i.e. some input does.
  Var record(std::vector<double> value, std::initializer_list<Var> inputs, BackwardFn fn);
  Var record(std::vector<double> value, std::span<const Var> inputs, BackwardFn fn);

  // Seeds d(root)/d(root) = 1 and visits nodes in reverse recording order.
  // A tape can be run backward once.
  void backward(Var root);

 private:
  struct Node {
    std::vector<double> owned;
    std::span<const double> value;
    std::vector<double> owned_grad;
    std::span<double> grad;
    bool requires_grad = false;
    BackwardFn backward;
  };

  Var push(Node node);

  bool grad_enabled_;
  bool backward_done_ = false;
  std::deque<Node> nodes_;
};

inline std::span<const double> Var::value() const { return tape->value(*this); }
inline std::size_t Var::size() const { return tape->value(*this).size(); }

}  // namespace spark::numkit
