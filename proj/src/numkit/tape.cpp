#include "spark/numkit/tape.hpp"

#include "spark/error.hpp"

namespace spark::numkit {

double Var::scalar() const {
  auto v = value();
  if (!(v.size() == 1)) {
    fail(ErrorKind::kInvalidInput, "scalar() on a node of size " + std::to_string(v.size()));
  }
  return v[0];
}

Var Tape::push(Node node) {
  nodes_.push_back(std::move(node));
  return Var{this, nodes_.size() - 1};
}

Var Tape::constant(std::vector<double> value) {
  Node node;
  node.owned = std::move(value);
  node.value = node.owned;
  return push(std::move(node));
}

Var Tape::parameter(ParameterStore& store, std::string_view name) {
  ParamEntry& entry = store.at(name);
  Node node;
  node.value = entry.value;
  if (grad_enabled_ && entry.trainable) {
    node.grad = entry.grad;
    node.requires_grad = true;
  }
  return push(std::move(node));
}

Var Tape::record(std::vector<double> value, std::initializer_list<Var> inputs, BackwardFn fn) {
  return record(std::move(value), std::span<const Var>(inputs.begin(), inputs.size()), std::move(fn));
}

Var Tape::record(std::vector<double> value, std::span<const Var> inputs, BackwardFn fn) {
  Node node;
  node.owned = std::move(value);
  node.value = node.owned;
  if (grad_enabled_) {
    for (const Var& in : inputs) {
      if (nodes_[in.id].requires_grad) {
        node.requires_grad = true;
        break;
      }
    }
  }
  if (node.requires_grad) {
    node.owned_grad.assign(node.owned.size(), 0.0);
    node.grad = node.owned_grad;
    node.backward = std::move(fn);
  }
  return push(std::move(node));
}

void Tape::backward(Var root) {
  require(!backward_done_, ErrorKind::kInvalidInput, "backward already ran on this tape");
  require(root.tape == this, ErrorKind::kInvalidInput, "backward root belongs to another tape");
  require(nodes_[root.id].value.size() == 1, ErrorKind::kInvalidInput, "backward root must be a scalar");
  backward_done_ = true;
  if (!nodes_[root.id].requires_grad) return;
  nodes_[root.id].grad[0] += 1.0;
  for (std::size_t i = root.id + 1; i-- > 0;) {
    Node& node = nodes_[i];
    if (node.backward) node.backward(*this, Var{this, i});
  }
}

}  // namespace spark::numkit
