#ifndef SCGAN_TAPE_HPP
#define SCGAN_TAPE_HPP

#include <functional>
#include <memory>
#include <unordered_set>
#include <utility>
#include <vector>

#include "scgan/common.hpp"
#include "scgan/tensor.hpp"

namespace scgan {

// ---------------------------------------------------------------------------
// Reverse-mode autodiff on a dynamically built graph.
//
// Each op allocates a Node holding its output tensor, shared_ptr links to the
// operand nodes, and a closure that pushes gradients to those operands. The
// graph is whatever chain of Nodes hangs off the final Var; backward() walks
// it in reverse topological order. Interior node storage is released as soon
// as its gradient has been propagated, which keeps peak memory close to the
// live-activation watermark instead of the whole-graph total.
// ---------------------------------------------------------------------------

template <typename T>
struct Node {
    Tensor<T> value;
    Tensor<T> grad;
    std::vector<std::shared_ptr<Node>> parents;
    std::function<void(Node&)> backward_fn;
    bool needs_grad = false; // gradient flows to or through this node
    bool is_leaf = false;    // inputs & parameters: storage is never released
    bool has_grad = false;   // grad tensor is allocated and valid
};

template <typename T>
using Var = std::shared_ptr<Node<T>>;

using VarF = Var<float>;
using VarD = Var<double>;

// --- graph construction ----------------------------------------------------

namespace tape_detail {
inline thread_local bool grad_enabled = true;
}

// Disables graph construction in its scope; forwards become plain evaluation.
class NoGradGuard {
public:
    NoGradGuard() : saved_(tape_detail::grad_enabled) {
        tape_detail::grad_enabled = false;
    }
    ~NoGradGuard() { tape_detail::grad_enabled = saved_; }
    NoGradGuard(const NoGradGuard&) = delete;
    NoGradGuard& operator=(const NoGradGuard&) = delete;

private:
    bool saved_;
};

inline bool grad_enabled() { return tape_detail::grad_enabled; }

template <typename T>
Var<T> make_leaf(Tensor<T> value, bool needs_grad = false) {
    auto node = std::make_shared<Node<T>>();
    node->value = std::move(value);
    node->needs_grad = needs_grad && tape_detail::grad_enabled;
    node->is_leaf = true;
    return node;
}

template <typename T>
Var<T> make_param(Tensor<T> value) {
    auto node = std::make_shared<Node<T>>();
    node->value = std::move(value);
    node->needs_grad = true;
    node->is_leaf = true;
    return node;
}

template <typename T>
Var<T> constant(Tensor<T> value) {
    return make_leaf(std::move(value), false);
}

// Result node for an op. If no operand carries gradient (or grads are
// globally disabled) the links and closure are dropped, so untracked
// subgraphs cost nothing beyond their forward values.
template <typename T>
Var<T> make_op(Tensor<T> value, std::vector<Var<T>> parents,
               std::function<void(Node<T>&)> backward_fn) {
    auto node = std::make_shared<Node<T>>();
    node->value = std::move(value);
    bool needs = false;
    if (tape_detail::grad_enabled) {
        for (const auto& p : parents)
            if (p && p->needs_grad) { needs = true; break; }
    }
    node->needs_grad = needs;
    if (needs) {
        node->parents = std::move(parents);
        node->backward_fn = std::move(backward_fn);
    } else {
        node->is_leaf = true; // constant result; nothing to walk
    }
    return node;
}

// New leaf sharing nothing with the source graph.
template <typename T>
Var<T> detach(const Var<T>& v) {
    return make_leaf(Tensor<T>(v->value), false);
}

// --- gradient access -------------------------------------------------------

template <typename T>
Tensor<T>& grad_of(const Var<T>& v) {
    if (!v->has_grad) {
        v->grad = Tensor<T>(v->value.shape(), T(0));
        v->has_grad = true;
    }
    return v->grad;
}

template <typename T>
void zero_grad(const Var<T>& v) {
    v->grad = Tensor<T>();
    v->has_grad = false;
}

template <typename T>
T scalar(const Var<T>& v) {
    SCGAN_CHECK(v->value.numel() == 1, DimensionError,
                "expected a scalar, got shape ", v->value.shape().str());
    return v->value[0];
}

// --- backward --------------------------------------------------------------

// Reverse-mode sweep from a scalar root. Afterwards every reachable leaf with
// needs_grad has its grad populated. When release_graph is true (default),
// interior values and grads are freed as soon as they are consumed.
template <typename T>
void backward(const Var<T>& root, bool release_graph = true) {
    SCGAN_CHECK(root && root->needs_grad, ArgumentError,
                "backward: root does not require gradients");
    SCGAN_CHECK(root->value.numel() == 1, DimensionError,
                "backward: root must be scalar, got shape ",
                root->value.shape().str());

    // Topological order (parents before children) via iterative DFS.
    std::vector<Node<T>*> order;
    std::unordered_set<Node<T>*> visited;
    struct Frame {
        Node<T>* node;
        std::size_t next_parent;
    };
    std::vector<Frame> stack;
    stack.push_back({root.get(), 0});
    visited.insert(root.get());
    while (!stack.empty()) {
        Frame& frame = stack.back();
        if (frame.next_parent < frame.node->parents.size()) {
            Node<T>* parent = frame.node->parents[frame.next_parent++].get();
            if (parent && parent->needs_grad && !visited.count(parent)) {
                visited.insert(parent);
                stack.push_back({parent, 0});
            }
        } else {
            order.push_back(frame.node);
            stack.pop_back();
        }
    }

    grad_of(root)[0] = T(1);

    for (auto it = order.rbegin(); it != order.rend(); ++it) {
        Node<T>* node = *it;
        // A node with no accumulated grad contributes nothing; skipping it
        // also spares closures from handling an unallocated grad tensor.
        if (node->backward_fn && node->has_grad) node->backward_fn(*node);
        if (release_graph && !node->is_leaf) {
            // Free the heavy storage (tensors, closure captures) but keep the
            // parent links: the raw pointers in `order` stay valid because
            // every node remains owned by its children until the caller drops
            // the root Var.
            if (node != root.get()) node->value = Tensor<T>();
            node->grad = Tensor<T>();
            node->has_grad = false;
            node->backward_fn = nullptr;
        }
    }
}

} // namespace scgan

#endif
