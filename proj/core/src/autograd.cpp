#include "esgpv/autograd.hpp"

#include "esgpv/common.hpp"
#include "esgpv/rng.hpp"

#include <cmath>
#include <unordered_set>

namespace esgpv::ag {

namespace {

constexpr double kInvSqrt2 = 0.70710678118654752440;
constexpr double kInvSqrt2Pi = 0.39894228040143267794;

Value make_op(Mat val, std::vector<Value> parents, std::function<void(Node&)> backprop) {
    auto node = std::make_shared<Node>();
    node->val = std::move(val);
    node->parents = std::move(parents);
    for (const auto& p : node->parents) {
        if (p->requires_grad) {
            node->requires_grad = true;
            break;
        }
    }
    if (node->requires_grad) node->backprop = std::move(backprop);
    return node;
}

void check_same_shape(const Value& a, const Value& b, const char* op) {
    if (a->val.rows() != b->val.rows() || a->val.cols() != b->val.cols()) {
        throw InternalError(std::string(op) + ": shape mismatch");
    }
}

} // namespace

void Node::ensure_grad() {
    if (grad.rows() != val.rows() || grad.cols() != val.cols()) {
        grad = Mat::Zero(val.rows(), val.cols());
    }
}

void Node::accumulate(const Mat& g) {
    ensure_grad();
    grad += g;
}

Value constant(Mat m) {
    auto node = std::make_shared<Node>();
    node->val = std::move(m);
    return node;
}

Value parameter(std::string name, Mat m) {
    auto node = std::make_shared<Node>();
    node->val = std::move(m);
    node->requires_grad = true;
    node->name = std::move(name);
    return node;
}

Value matmul(const Value& a, const Value& b) {
    if (a->val.cols() != b->val.rows()) throw InternalError("matmul: inner dimension mismatch");
    return make_op(a->val * b->val, {a, b}, [a, b](Node& n) {
        if (a->requires_grad) a->accumulate(n.grad * b->val.transpose());
        if (b->requires_grad) b->accumulate(a->val.transpose() * n.grad);
    });
}

Value transpose(const Value& a) {
    return make_op(a->val.transpose(), {a}, [a](Node& n) {
        if (a->requires_grad) a->accumulate(n.grad.transpose());
    });
}

Value add(const Value& a, const Value& b) {
    check_same_shape(a, b, "add");
    return make_op(a->val + b->val, {a, b}, [a, b](Node& n) {
        if (a->requires_grad) a->accumulate(n.grad);
        if (b->requires_grad) b->accumulate(n.grad);
    });
}

Value add_rowvec(const Value& a, const Value& row) {
    if (row->val.rows() != 1 || row->val.cols() != a->val.cols()) {
        throw InternalError("add_rowvec: expected 1x" + std::to_string(a->val.cols()));
    }
    Mat out = a->val;
    out.rowwise() += row->val.row(0);
    return make_op(std::move(out), {a, row}, [a, row](Node& n) {
        if (a->requires_grad) a->accumulate(n.grad);
        if (row->requires_grad) row->accumulate(n.grad.colwise().sum());
    });
}

Value sub(const Value& a, const Value& b) {
    check_same_shape(a, b, "sub");
    return make_op(a->val - b->val, {a, b}, [a, b](Node& n) {
        if (a->requires_grad) a->accumulate(n.grad);
        if (b->requires_grad) b->accumulate(-n.grad);
    });
}

Value cmul(const Value& a, const Value& b) {
    check_same_shape(a, b, "cmul");
    return make_op(a->val.cwiseProduct(b->val), {a, b}, [a, b](Node& n) {
        if (a->requires_grad) a->accumulate(n.grad.cwiseProduct(b->val));
        if (b->requires_grad) b->accumulate(n.grad.cwiseProduct(a->val));
    });
}

Value scale(const Value& a, double s) {
    return make_op(a->val * s, {a}, [a, s](Node& n) {
        if (a->requires_grad) a->accumulate(n.grad * s);
    });
}

Value add_scalar(const Value& a, double c) {
    return make_op(a->val.array() + c, {a}, [a](Node& n) {
        if (a->requires_grad) a->accumulate(n.grad);
    });
}

Value axpby(double alpha, const Value& a, double beta, const Value& b) {
    check_same_shape(a, b, "axpby");
    return make_op(alpha * a->val + beta * b->val, {a, b}, [a, b, alpha, beta](Node& n) {
        if (a->requires_grad) a->accumulate(alpha * n.grad);
        if (b->requires_grad) b->accumulate(beta * n.grad);
    });
}

Value sum_all(const Value& a) {
    Mat out(1, 1);
    out(0, 0) = a->val.sum();
    return make_op(std::move(out), {a}, [a](Node& n) {
        if (a->requires_grad)
            a->accumulate(Mat::Constant(a->val.rows(), a->val.cols(), n.grad(0, 0)));
    });
}

Value mean_all(const Value& a) {
    const double inv = 1.0 / static_cast<double>(a->val.size());
    Mat out(1, 1);
    out(0, 0) = a->val.sum() * inv;
    return make_op(std::move(out), {a}, [a, inv](Node& n) {
        if (a->requires_grad)
            a->accumulate(Mat::Constant(a->val.rows(), a->val.cols(), n.grad(0, 0) * inv));
    });
}

Value slice_rows(const Value& a, int r0, int n) {
    if (r0 < 0 || n < 0 || r0 + n > a->val.rows()) throw InternalError("slice_rows: bad range");
    return make_op(a->val.middleRows(r0, n), {a}, [a, r0, n](Node& node) {
        if (!a->requires_grad) return;
        a->ensure_grad();
        a->grad.middleRows(r0, n) += node.grad;
    });
}

Value slice_cols(const Value& a, int c0, int n) {
    if (c0 < 0 || n < 0 || c0 + n > a->val.cols()) throw InternalError("slice_cols: bad range");
    return make_op(a->val.middleCols(c0, n), {a}, [a, c0, n](Node& node) {
        if (!a->requires_grad) return;
        a->ensure_grad();
        a->grad.middleCols(c0, n) += node.grad;
    });
}

Value concat_cols(const std::vector<Value>& parts) {
    if (parts.empty()) throw InternalError("concat_cols: no parts");
    const auto rows = parts[0]->val.rows();
    Eigen::Index cols = 0;
    for (const auto& p : parts) {
        if (p->val.rows() != rows) throw InternalError("concat_cols: row mismatch");
        cols += p->val.cols();
    }
    Mat out(rows, cols);
    Eigen::Index at = 0;
    for (const auto& p : parts) {
        out.middleCols(at, p->val.cols()) = p->val;
        at += p->val.cols();
    }
    return make_op(std::move(out), parts, [parts](Node& n) {
        Eigen::Index at = 0;
        for (const auto& p : parts) {
            if (p->requires_grad) {
                p->ensure_grad();
                p->grad += n.grad.middleCols(at, p->val.cols());
            }
            at += p->val.cols();
        }
    });
}

Value gather_rows(const Value& table, const std::vector<int>& ids) {
    Mat out(static_cast<Eigen::Index>(ids.size()), table->val.cols());
    for (size_t i = 0; i < ids.size(); ++i) {
        if (ids[i] < 0 || ids[i] >= table->val.rows())
            throw InternalError("gather_rows: id out of range");
        out.row(static_cast<Eigen::Index>(i)) = table->val.row(ids[i]);
    }
    return make_op(std::move(out), {table}, [table, ids](Node& n) {
        if (!table->requires_grad) return;
        table->ensure_grad();
        for (size_t i = 0; i < ids.size(); ++i) {
            table->grad.row(ids[i]) += n.grad.row(static_cast<Eigen::Index>(i));
        }
    });
}

Value gelu(const Value& a) {
    Mat out = a->val.unaryExpr(
        [](double x) { return 0.5 * x * (1.0 + std::erf(x * kInvSqrt2)); });
    return make_op(std::move(out), {a}, [a](Node& n) {
        if (!a->requires_grad) return;
        Mat d = a->val.unaryExpr([](double x) {
            const double cdf = 0.5 * (1.0 + std::erf(x * kInvSqrt2));
            const double pdf = kInvSqrt2Pi * std::exp(-0.5 * x * x);
            return cdf + x * pdf;
        });
        a->accumulate(n.grad.cwiseProduct(d));
    });
}

Value log_clamped(const Value& a, double floor) {
    Mat out = a->val.unaryExpr([floor](double x) { return std::log(std::max(x, floor)); });
    return make_op(std::move(out), {a}, [a, floor](Node& n) {
        if (!a->requires_grad) return;
        Mat d = a->val.unaryExpr(
            [floor](double x) { return x > floor ? 1.0 / x : 0.0; });
        a->accumulate(n.grad.cwiseProduct(d));
    });
}

Value pow_const(const Value& a, double e) {
    if (e == 0.0) {
        return constant(Mat::Ones(a->val.rows(), a->val.cols()));
    }
    Mat out = a->val.unaryExpr([e](double x) { return std::pow(x, e); });
    return make_op(std::move(out), {a}, [a, e](Node& n) {
        if (!a->requires_grad) return;
        Mat d = a->val.unaryExpr([e](double x) {
            if (x == 0.0 && e < 1.0) return 0.0; // avoid the singular derivative
            return e * std::pow(x, e - 1.0);
        });
        a->accumulate(n.grad.cwiseProduct(d));
    });
}

Value pick(const Value& a, int r, int c) {
    if (r < 0 || r >= a->val.rows() || c < 0 || c >= a->val.cols())
        throw InternalError("pick: index out of range");
    Mat out(1, 1);
    out(0, 0) = a->val(r, c);
    return make_op(std::move(out), {a}, [a, r, c](Node& n) {
        if (!a->requires_grad) return;
        a->ensure_grad();
        a->grad(r, c) += n.grad(0, 0);
    });
}

Value softmax_rows_masked(const Value& scores, const std::vector<int>& mask) {
    const auto cols = scores->val.cols();
    if (static_cast<Eigen::Index>(mask.size()) != cols) {
        throw InternalError("softmax_rows_masked: mask length mismatch");
    }
    bool any = false;
    for (int m : mask) any = any || (m != 0);
    if (!any) throw InternalError("softmax_rows_masked: all positions masked");

    Mat out(scores->val.rows(), cols);
    for (Eigen::Index r = 0; r < scores->val.rows(); ++r) {
        double row_max = -std::numeric_limits<double>::infinity();
        for (Eigen::Index c = 0; c < cols; ++c) {
            if (mask[static_cast<size_t>(c)]) row_max = std::max(row_max, scores->val(r, c));
        }
        double denom = 0.0;
        for (Eigen::Index c = 0; c < cols; ++c) {
            const double z = mask[static_cast<size_t>(c)]
                                 ? std::exp(scores->val(r, c) - row_max)
                                 : 0.0;
            out(r, c) = z;
            denom += z;
        }
        out.row(r) /= denom;
    }
    return make_op(std::move(out), {scores}, [scores, mask](Node& n) {
        if (!scores->requires_grad) return;
        Mat d(n.val.rows(), n.val.cols());
        for (Eigen::Index r = 0; r < n.val.rows(); ++r) {
            const double dot = n.grad.row(r).dot(n.val.row(r));
            for (Eigen::Index c = 0; c < n.val.cols(); ++c) {
                d(r, c) = n.val(r, c) * (n.grad(r, c) - dot);
            }
        }
        scores->accumulate(d);
    });
}

Value layer_norm(const Value& x, const Value& gain, const Value& bias, double eps) {
    const auto cols = x->val.cols();
    if (gain->val.cols() != cols || bias->val.cols() != cols || gain->val.rows() != 1 ||
        bias->val.rows() != 1) {
        throw InternalError("layer_norm: affine parameter shape mismatch");
    }
    Mat xhat(x->val.rows(), cols);
    Mat inv_std(x->val.rows(), 1);
    for (Eigen::Index r = 0; r < x->val.rows(); ++r) {
        const double mean = x->val.row(r).mean();
        const double var =
            (x->val.row(r).array() - mean).square().sum() / static_cast<double>(cols);
        const double s = 1.0 / std::sqrt(var + eps);
        inv_std(r, 0) = s;
        xhat.row(r) = (x->val.row(r).array() - mean) * s;
    }
    Mat out = xhat;
    for (Eigen::Index r = 0; r < out.rows(); ++r) {
        out.row(r) = out.row(r).cwiseProduct(gain->val.row(0)) + bias->val.row(0);
    }
    return make_op(std::move(out), {x, gain, bias},
                   [x, gain, bias, xhat, inv_std](Node& n) {
                       const auto cols = x->val.cols();
                       if (gain->requires_grad) {
                           Mat dg = Mat::Zero(1, cols);
                           for (Eigen::Index r = 0; r < n.grad.rows(); ++r) {
                               dg.row(0) += n.grad.row(r).cwiseProduct(xhat.row(r));
                           }
                           gain->accumulate(dg);
                       }
                       if (bias->requires_grad) bias->accumulate(n.grad.colwise().sum());
                       if (x->requires_grad) {
                           Mat dx(x->val.rows(), cols);
                           const double inv_n = 1.0 / static_cast<double>(cols);
                           for (Eigen::Index r = 0; r < x->val.rows(); ++r) {
                               // dxhat = g .* grad; dx = s*(dxhat - mean(dxhat)
                               //         - xhat * mean(dxhat .* xhat))
                               Eigen::RowVectorXd dxhat =
                                   n.grad.row(r).cwiseProduct(gain->val.row(0));
                               const double m1 = dxhat.sum() * inv_n;
                               const double m2 = dxhat.cwiseProduct(xhat.row(r)).sum() * inv_n;
                               dx.row(r) =
                                   inv_std(r, 0) *
                                   (dxhat.array() - m1 - xhat.row(r).array() * m2);
                           }
                           x->accumulate(dx);
                       }
                   });
}

Value dropout(const Value& x, double rate, Mode mode, DetRng* rng) {
    if (mode == Mode::Eval || rate <= 0.0) return x;
    if (rate >= 1.0) throw InternalError("dropout: rate must be < 1");
    if (rng == nullptr) throw InternalError("dropout: training mode needs an rng");
    const double keep_scale = 1.0 / (1.0 - rate);
    Mat mask(x->val.rows(), x->val.cols());
    for (Eigen::Index r = 0; r < mask.rows(); ++r) {
        for (Eigen::Index c = 0; c < mask.cols(); ++c) {
            mask(r, c) = rng->bernoulli(rate) ? 0.0 : keep_scale;
        }
    }
    return make_op(x->val.cwiseProduct(mask), {x}, [x, mask](Node& n) {
        if (x->requires_grad) x->accumulate(n.grad.cwiseProduct(mask));
    });
}

void backward(const Value& root) {
    if (root->val.rows() != 1 || root->val.cols() != 1) {
        throw InternalError("backward: root must be a scalar");
    }
    if (!root->requires_grad) return;

    // Topological order over the reachable grad-requiring subgraph.
    std::vector<Node*> order;
    std::unordered_set<Node*> seen;
    std::vector<std::pair<Node*, size_t>> stack;
    stack.emplace_back(root.get(), 0);
    seen.insert(root.get());
    while (!stack.empty()) {
        auto& [node, next] = stack.back();
        if (next < node->parents.size()) {
            Node* parent = node->parents[next].get();
            ++next;
            if (parent->requires_grad && !seen.count(parent)) {
                seen.insert(parent);
                stack.emplace_back(parent, 0);
            }
        } else {
            order.push_back(node);
            stack.pop_back();
        }
    }

    root->ensure_grad();
    root->grad(0, 0) += 1.0;
    for (auto it = order.rbegin(); it != order.rend(); ++it) {
        Node* node = *it;
        if (node->backprop) {
            node->ensure_grad();
            node->backprop(*node);
        }
    }
}

Value ParamStore::create(const std::string& name, int rows, int cols,
                         const std::function<double()>& init) {
    if (index_.count(name)) throw InternalError("duplicate parameter name: " + name);
    Mat m(rows, cols);
    for (Eigen::Index r = 0; r < rows; ++r) {
        for (Eigen::Index c = 0; c < cols; ++c) m(r, c) = init();
    }
    auto value = parameter(name, std::move(m));
    index_[name] = items_.size();
    items_.emplace_back(name, value);
    return value;
}

Value ParamStore::zeros(const std::string& name, int rows, int cols) {
    return create(name, rows, cols, [] { return 0.0; });
}

Value ParamStore::ones(const std::string& name, int rows, int cols) {
    return create(name, rows, cols, [] { return 1.0; });
}

const Value& ParamStore::get(const std::string& name) const {
    auto it = index_.find(name);
    if (it == index_.end()) throw InternalError("unknown parameter: " + name);
    return items_[it->second].second;
}

bool ParamStore::has(const std::string& name) const { return index_.count(name) > 0; }

void ParamStore::zero_grad() {
    for (auto& [name, value] : items_) {
        value->grad = Mat::Zero(value->val.rows(), value->val.cols());
    }
}

std::map<std::string, Mat> ParamStore::snapshot() const {
    std::map<std::string, Mat> out;
    for (const auto& [name, value] : items_) out[name] = value->val;
    return out;
}

void ParamStore::restore(const std::map<std::string, Mat>& snapshot) {
    for (auto& [name, value] : items_) {
        auto it = snapshot.find(name);
        if (it == snapshot.end()) throw InternalError("snapshot missing parameter: " + name);
        value->val = it->second;
    }
}

} // namespace esgpv::ag
