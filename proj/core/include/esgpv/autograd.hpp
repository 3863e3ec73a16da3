#pragma once

#include <Eigen/Core>

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <string>
#include <vector>

namespace esgpv {
class DetRng;
}

namespace esgpv::ag {

using Mat = Eigen::MatrixXd;

enum class Mode { Train, Eval };

// One node of the reverse-mode tape. Values are dense double matrices;
// scalars are 1x1. Graphs are per-example DAGs that die when the handles
// drop; parameters are long-lived leaves.
class Node {
public:
    Mat val;
    Mat grad;
    bool requires_grad = false;
    std::string name; // non-empty for parameters
    std::vector<std::shared_ptr<Node>> parents;
    std::function<void(Node&)> backprop; // distributes this->grad to parents

    void accumulate(const Mat& g);
    void ensure_grad();
};

using Value = std::shared_ptr<Node>;

Value constant(Mat m);
Value parameter(std::string name, Mat m);

// ---- elementwise / linear algebra ----
Value matmul(const Value& a, const Value& b);
Value transpose(const Value& a);
Value add(const Value& a, const Value& b);           // same shape
Value add_rowvec(const Value& a, const Value& row);  // broadcast 1xN over rows
Value sub(const Value& a, const Value& b);
Value cmul(const Value& a, const Value& b);          // Hadamard
Value scale(const Value& a, double s);
Value add_scalar(const Value& a, double c);
Value axpby(double alpha, const Value& a, double beta, const Value& b);
Value sum_all(const Value& a);   // 1x1
Value mean_all(const Value& a);  // 1x1

// ---- shape ops ----
Value slice_rows(const Value& a, int r0, int n);
Value slice_cols(const Value& a, int c0, int n);
Value concat_cols(const std::vector<Value>& parts);
Value gather_rows(const Value& table, const std::vector<int>& ids);

// ---- nonlinearities ----
Value gelu(const Value& a); // exact erf form
Value log_clamped(const Value& a, double floor); // log(max(a, floor))
Value pow_const(const Value& a, double e);       // e == 0 yields a constant 1
Value pick(const Value& a, int r, int c);        // 1x1 element view

// Row-wise softmax restricted to unmasked columns; masked columns are
// exactly zero in the output and the row max is taken over unmasked
// entries only, so masked values never perturb unmasked results.
Value softmax_rows_masked(const Value& scores, const std::vector<int>& mask);

// Row-wise layer normalization with affine parameters (1xN each).
Value layer_norm(const Value& x, const Value& gain, const Value& bias, double eps = 1e-5);

// Inverted dropout. Identity in Eval mode; Train mode draws the keep mask
// from `rng` and rescales by 1/(1-rate).
Value dropout(const Value& x, double rate, Mode mode, DetRng* rng);

// Reverse-mode sweep from a 1x1 root. Gradients accumulate into every
// reachable node with requires_grad.
void backward(const Value& root);

// Long-lived named parameters in insertion order.
class ParamStore {
public:
    Value create(const std::string& name, int rows, int cols,
                 const std::function<double()>& init);
    Value zeros(const std::string& name, int rows, int cols);
    Value ones(const std::string& name, int rows, int cols);
    const Value& get(const std::string& name) const;
    bool has(const std::string& name) const;
    const std::vector<std::pair<std::string, Value>>& items() const { return items_; }
    void zero_grad();
    std::map<std::string, Mat> snapshot() const;
    void restore(const std::map<std::string, Mat>& snapshot);

private:
    std::vector<std::pair<std::string, Value>> items_;
    std::map<std::string, size_t> index_;
};

} // namespace esgpv::ag
