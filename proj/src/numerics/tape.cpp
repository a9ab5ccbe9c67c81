#include "mvtryon/numerics/tape.hpp"

#include <algorithm>

#include "mvtryon/errors.hpp"

namespace mvt {

const Tensor& Var::value() const {
    if (!tape_) throw ContractError("use of an unbound Var");
    return tape_->value(id_);
}

bool Var::requires_grad() const { return tape_ && tape_->needs_grad(id_); }

Var Tape::constant(Tensor value) {
    if (consumed_) throw ContractError("tape already consumed by backward()");
    nodes_.push_back(Node{std::move(value), nullptr, false, {}, {}});
    return Var(this, nodes_.size() - 1);
}

Var Tape::leaf(Tensor& param) {
    if (consumed_) throw ContractError("tape already consumed by backward()");
    Tensor copy(param.shape(), param.storage());
    const bool trainable = param.requires_grad();
    nodes_.push_back(Node{std::move(copy), trainable ? &param : nullptr, trainable, {}, {}});
    return Var(this, nodes_.size() - 1);
}

Var Tape::record(Tensor value, bool needs_grad, BackwardFn fn) {
    if (consumed_) throw ContractError("tape already consumed by backward()");
    Node node{std::move(value), nullptr, needs_grad, {}, {}};
    if (needs_grad) node.backward = std::move(fn);
    nodes_.push_back(std::move(node));
    return Var(this, nodes_.size() - 1);
}

std::vector<double>& Tape::grad(std::size_t id) {
    Node& n = nodes_.at(id);
    if (n.grad.size() != n.value.numel()) n.grad.assign(n.value.numel(), 0.0);
    return n.grad;
}

void Tape::backward(Var loss) {
    if (loss.tape() != this) throw ContractError("loss does not belong to this tape");
    if (consumed_) throw ContractError("tape already consumed by backward()");
    const Node& root = nodes_.at(loss.id());
    if (root.value.numel() != 1) {
        throw ContractError("backward() needs a scalar loss, got shape " + shape_str(root.value.shape()));
    }
    if (!root.needs_grad) throw ContractError("backward() on a loss detached from every parameter");

    grad(loss.id())[0] = 1.0;
    for (std::size_t i = loss.id() + 1; i-- > 0;) {
        Node& n = nodes_[i];
        if (!n.needs_grad || n.grad.empty()) continue;
        if (n.backward) {
            n.backward(*this, i, n.grad);
        } else if (n.param) {
            auto g = n.param->ensure_grad();
            for (std::size_t k = 0; k < g.size(); ++k) g[k] += n.grad[k];
        }
        // Intermediate gradients are no longer needed once propagated.
        std::vector<double>().swap(n.grad);
    }
    consumed_ = true;
}

}  // namespace mvt
