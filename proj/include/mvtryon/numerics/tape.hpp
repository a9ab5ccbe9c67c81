#pragma once

#include <cstddef>
#include <deque>
#include <functional>
#include <vector>

#include "mvtryon/numerics/tensor.hpp"

namespace mvt {

class Tape;

// Handle to a value recorded on a Tape. Cheap to copy; valid while the tape lives.
class Var {
   public:
    Var() = default;

    const Tensor& value() const;
    const Shape& shape() const { return value().shape(); }
    std::size_t numel() const { return value().numel(); }
    bool requires_grad() const;
    Tape* tape() const { return tape_; }
    std::size_t id() const { return id_; }
    bool valid() const { return tape_ != nullptr; }

   private:
    friend class Tape;
    Var(Tape* tape, std::size_t id) : tape_(tape), id_(id) {}

    Tape* tape_ = nullptr;
    std::size_t id_ = 0;
};

// Records a forward pass in topological order and replays it in reverse.
// One tape per forward/backward pass; a tape can be backpropagated once.
class Tape {
   public:
    // Receives the gradient of the node's output; adds into input gradients.
    using BackwardFn = std::function<void(Tape&, std::size_t self, const std::vector<double>& out_grad)>;

    Tape() = default;
    Tape(const Tape&) = delete;
    Tape& operator=(const Tape&) = delete;

    // Value that never receives gradient.
    Var constant(Tensor value);
    // Binds a parameter. If it requires grad, backward() accumulates into param.grad.
    Var leaf(Tensor& param);

    // Used by operations. `needs_grad` false skips storing the closure.
    Var record(Tensor value, bool needs_grad, BackwardFn fn);

    // Seeds d(loss)/d(loss) = 1 and propagates to every bound leaf.
    void backward(Var loss);

    bool consumed() const { return consumed_; }
    std::size_t size() const { return nodes_.size(); }

    const Tensor& value(std::size_t id) const { return nodes_.at(id).value; }
    bool needs_grad(std::size_t id) const { return nodes_.at(id).needs_grad; }
    // Gradient buffer for a node, allocated on first use. Only valid during backward().
    std::vector<double>& grad(std::size_t id);

   private:
    struct Node {
        Tensor value;
        Tensor* param = nullptr;
        bool needs_grad = false;
        std::vector<double> grad;
        BackwardFn backward;
    };

    std::deque<Node> nodes_;
    bool consumed_ = false;
};

}  // namespace mvt
