#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <memory>
#include <vector>

#include "homogcl/matrix.hpp"

namespace homogcl::ad {

struct Var {
    std::size_t idx = static_cast<std::size_t>(-1);
};

// Reverse-mode gradient tape over a fixed op set. Nodes are appended in
// construction order, which is a topological order, so backward is a single
// reverse sweep. Every op validates its output for finiteness and reports
// the op name on failure.
class Tape {
public:
    Tape() = default;
    Tape(const Tape&) = delete;
    Tape& operator=(const Tape&) = delete;

    Var param(DenseMatrix value) { return push("param", std::move(value), true, {}); }
    Var constant(DenseMatrix value) { return push("constant", std::move(value), false, {}); }
    Var constant_scalar(double v) { return constant(DenseMatrix(1, 1, v)); }

    const DenseMatrix& value(Var v) const { return nodes_[v.idx].value; }

    double value_scalar(Var v) const {
        const DenseMatrix& m = value(v);
        if (m.rows() != 1 || m.cols() != 1) fail<DataError>("value_scalar: not a 1x1 value");
        return m(0, 0);
    }

    // Gradient buffer of a node after backward; zeros if unreachable.
    const DenseMatrix& grad(Var v) const {
        if (!nodes_[v.idx].needs_grad) fail<DataError>("grad: node does not carry gradients");
        return nodes_[v.idx].grad;
    }

    Var add(Var a, Var b) {
        DenseMatrix v = homogcl::add(value(a), value(b));
        return push("add", std::move(v), needs(a, b), [a, b](Tape& t, const DenseMatrix& g) {
            t.accumulate(a, g);
            t.accumulate(b, g);
        });
    }

    Var sub(Var a, Var b) {
        DenseMatrix v = homogcl::sub(value(a), value(b));
        return push("sub", std::move(v), needs(a, b), [a, b](Tape& t, const DenseMatrix& g) {
            t.accumulate(a, g);
            t.accumulate(b, homogcl::scalar_mul(g, -1.0));
        });
    }

    Var mul(Var a, Var b) {
        DenseMatrix v = homogcl::mul(value(a), value(b));
        return push("mul", std::move(v), needs(a, b), [a, b](Tape& t, const DenseMatrix& g) {
            t.accumulate(a, homogcl::mul(g, t.value(b)));
            t.accumulate(b, homogcl::mul(g, t.value(a)));
        });
    }

    Var scalar_mul(Var a, double s) {
        DenseMatrix v = homogcl::scalar_mul(value(a), s);
        return push("scalar_mul", std::move(v), needs(a), [a, s](Tape& t, const DenseMatrix& g) {
            t.accumulate(a, homogcl::scalar_mul(g, s));
        });
    }

    Var scalar_add(Var a, double s) {
        DenseMatrix v = homogcl::scalar_add(value(a), s);
        return push("scalar_add", std::move(v), needs(a),
                    [a](Tape& t, const DenseMatrix& g) { t.accumulate(a, g); });
    }

    Var matmul(Var a, Var b) {
        DenseMatrix v = homogcl::matmul(value(a), value(b));
        return push("matmul", std::move(v), needs(a, b), [a, b](Tape& t, const DenseMatrix& g) {
            t.accumulate(a, homogcl::matmul_nt(g, t.value(b)));
            t.accumulate(b, homogcl::matmul_tn(t.value(a), g));
        });
    }

    // a * b^T
    Var matmul_nt(Var a, Var b) {
        DenseMatrix v = homogcl::matmul_nt(value(a), value(b));
        return push("matmul_nt", std::move(v), needs(a, b), [a, b](Tape& t, const DenseMatrix& g) {
            t.accumulate(a, homogcl::matmul(g, t.value(b)));
            t.accumulate(b, homogcl::matmul_tn(g, t.value(a)));
        });
    }

    Var transpose(Var a) {
        DenseMatrix v = homogcl::transpose(value(a));
        return push("transpose", std::move(v), needs(a), [a](Tape& t, const DenseMatrix& g) {
            t.accumulate(a, homogcl::transpose(g));
        });
    }

    // Sparse matrix is a structural constant; gradients flow into the dense side.
    Var spmm(const CsrMatrix& s, Var b) {
        auto sp = std::make_shared<const CsrMatrix>(s);
        DenseMatrix v = homogcl::spmm(*sp, value(b));
        return push("spmm", std::move(v), needs(b), [sp, b](Tape& t, const DenseMatrix& g) {
            t.accumulate(b, homogcl::spmm_t(*sp, g));
        });
    }

    Var relu(Var a) {
        const DenseMatrix& av = value(a);
        for (double x : av.data()) relu_pattern_ = relu_pattern_ * 31u + (x > 0.0 ? 1u : 0u);
        DenseMatrix v = homogcl::relu(av);
        return push("relu", std::move(v), needs(a), [a](Tape& t, const DenseMatrix& g) {
            // Derivative at exactly 0 is 0.
            t.accumulate(a, zip(g, t.value(a), "relu_bwd",
                                [](double gi, double xi) { return xi > 0.0 ? gi : 0.0; }));
        });
    }

    Var exp(Var a) {
        DenseMatrix v = homogcl::map(value(a), [](double x) { return std::exp(x); });
        Var out = push("exp", std::move(v), needs(a), {});
        nodes_[out.idx].backward = [a, out](Tape& t, const DenseMatrix& g) {
            t.accumulate(a, homogcl::mul(g, t.value(out)));
        };
        return out;
    }

    Var log(Var a) {
        for (double x : value(a).data())
            if (x <= 0.0) fail<NumericError>("log: non-positive input");
        DenseMatrix v = homogcl::map(value(a), [](double x) { return std::log(x); });
        return push("log", std::move(v), needs(a), [a](Tape& t, const DenseMatrix& g) {
            t.accumulate(a, zip(g, t.value(a), "log_bwd",
                                [](double gi, double xi) { return gi / xi; }));
        });
    }

    Var row_l2_normalize(Var a) {
        DenseMatrix v = homogcl::row_l2_normalize(value(a));
        Var out = push("row_l2_normalize", std::move(v), needs(a), {});
        nodes_[out.idx].backward = [a, out](Tape& t, const DenseMatrix& g) {
            const DenseMatrix& x = t.value(a);
            const DenseMatrix& y = t.value(out);
            DenseMatrix gx(x.rows(), x.cols());
            for (std::size_t i = 0; i < x.rows(); ++i) {
                const double n = row_norm2(x, i);
                if (n == 0.0) continue;  // zero rows stay at zero
                const double gy = dot(g.row(i), y.row(i));
                for (std::size_t j = 0; j < x.cols(); ++j)
                    gx(i, j) = (g(i, j) - y(i, j) * gy) / n;
            }
            t.accumulate(a, std::move(gx));
        };
        return out;
    }

    Var softmax_rows(Var a) {
        const DenseMatrix& x = value(a);
        DenseMatrix v(x.rows(), x.cols());
        for (std::size_t i = 0; i < x.rows(); ++i) {
            double mx = x(i, 0);
            for (double xi : x.row(i)) mx = std::max(mx, xi);
            double z = 0.0;
            for (std::size_t j = 0; j < x.cols(); ++j) z += (v(i, j) = std::exp(x(i, j) - mx));
            for (std::size_t j = 0; j < x.cols(); ++j) v(i, j) /= z;
        }
        Var out = push("softmax_rows", std::move(v), needs(a), {});
        nodes_[out.idx].backward = [a, out](Tape& t, const DenseMatrix& g) {
            const DenseMatrix& y = t.value(out);
            DenseMatrix gx(y.rows(), y.cols());
            for (std::size_t i = 0; i < y.rows(); ++i) {
                const double gy = dot(g.row(i), y.row(i));
                for (std::size_t j = 0; j < y.cols(); ++j)
                    gx(i, j) = y(i, j) * (g(i, j) - gy);
            }
            t.accumulate(a, std::move(gx));
        };
        return out;
    }

    Var log_softmax_rows(Var a) {
        const DenseMatrix& x = value(a);
        DenseMatrix v(x.rows(), x.cols());
        for (std::size_t i = 0; i < x.rows(); ++i) {
            double mx = x(i, 0);
            for (double xi : x.row(i)) mx = std::max(mx, xi);
            double z = 0.0;
            for (double xi : x.row(i)) z += std::exp(xi - mx);
            const double lz = mx + std::log(z);
            for (std::size_t j = 0; j < x.cols(); ++j) v(i, j) = x(i, j) - lz;
        }
        Var out = push("log_softmax_rows", std::move(v), needs(a), {});
        nodes_[out.idx].backward = [a, out](Tape& t, const DenseMatrix& g) {
            const DenseMatrix& y = t.value(out);
            DenseMatrix gx(y.rows(), y.cols());
            for (std::size_t i = 0; i < y.rows(); ++i) {
                double gs = 0.0;
                for (double gi : g.row(i)) gs += gi;
                for (std::size_t j = 0; j < y.cols(); ++j)
                    gx(i, j) = g(i, j) - std::exp(y(i, j)) * gs;
            }
            t.accumulate(a, std::move(gx));
        };
        return out;
    }

    Var row_sums(Var a) {
        DenseMatrix v = homogcl::row_sums(value(a));
        return push("row_sums", std::move(v), needs(a), [a](Tape& t, const DenseMatrix& g) {
            const DenseMatrix& x = t.value(a);
            DenseMatrix gx(x.rows(), x.cols());
            for (std::size_t i = 0; i < x.rows(); ++i)
                for (std::size_t j = 0; j < x.cols(); ++j) gx(i, j) = g(i, 0);
            t.accumulate(a, std::move(gx));
        });
    }

    Var col_sums(Var a) {
        DenseMatrix v = homogcl::col_sums(value(a));
        return push("col_sums", std::move(v), needs(a), [a](Tape& t, const DenseMatrix& g) {
            const DenseMatrix& x = t.value(a);
            DenseMatrix gx(x.rows(), x.cols());
            for (std::size_t i = 0; i < x.rows(); ++i)
                for (std::size_t j = 0; j < x.cols(); ++j) gx(i, j) = g(0, j);
            t.accumulate(a, std::move(gx));
        });
    }

    Var sum_all(Var a) {
        DenseMatrix v(1, 1, homogcl::sum_all(value(a)));
        return push("sum_all", std::move(v), needs(a), [a](Tape& t, const DenseMatrix& g) {
            const DenseMatrix& x = t.value(a);
            t.accumulate(a, DenseMatrix(x.rows(), x.cols(), g(0, 0)));
        });
    }

    Var gather_rows(Var a, std::vector<std::size_t> idx) {
        auto ip = std::make_shared<const std::vector<std::size_t>>(std::move(idx));
        DenseMatrix v = homogcl::gather_rows(value(a), *ip);
        return push("gather_rows", std::move(v), needs(a),
                    [a, ip](Tape& t, const DenseMatrix& g) {
                        const DenseMatrix& x = t.value(a);
                        DenseMatrix gx(x.rows(), x.cols());
                        for (std::size_t r = 0; r < ip->size(); ++r)
                            for (std::size_t j = 0; j < x.cols(); ++j)
                                gx((*ip)[r], j) += g(r, j);
                        t.accumulate(a, std::move(gx));
                    });
    }

    // a_ij + c_i with c an N x 1 column.
    Var add_colvec(Var a, Var c) {
        const DenseMatrix& x = value(a);
        const DenseMatrix& cv = value(c);
        if (cv.rows() != x.rows() || cv.cols() != 1) fail<DataError>("add_colvec: shape mismatch");
        DenseMatrix v = x;
        for (std::size_t i = 0; i < x.rows(); ++i)
            for (std::size_t j = 0; j < x.cols(); ++j) v(i, j) += cv(i, 0);
        return push("add_colvec", std::move(v), needs(a, c),
                    [a, c](Tape& t, const DenseMatrix& g) {
                        t.accumulate(a, g);
                        t.accumulate(c, homogcl::row_sums(g));
                    });
    }

    // a_ij + r_j with r a 1 x M row.
    Var add_rowvec(Var a, Var r) {
        const DenseMatrix& x = value(a);
        const DenseMatrix& rv = value(r);
        if (rv.cols() != x.cols() || rv.rows() != 1) fail<DataError>("add_rowvec: shape mismatch");
        DenseMatrix v = x;
        for (std::size_t i = 0; i < x.rows(); ++i)
            for (std::size_t j = 0; j < x.cols(); ++j) v(i, j) += rv(0, j);
        return push("add_rowvec", std::move(v), needs(a, r),
                    [a, r](Tape& t, const DenseMatrix& g) {
                        t.accumulate(a, g);
                        t.accumulate(r, homogcl::col_sums(g));
                    });
    }

    // Reverse sweep from a scalar objective. Gradient buffers for all
    // gradient-carrying nodes are zero-initialized, so parameters the
    // objective never touches end up with zero gradients.
    void backward(Var objective) {
        const DenseMatrix& ov = value(objective);
        if (ov.rows() != 1 || ov.cols() != 1) fail<DataError>("backward: objective must be 1x1");
        if (!ov.all_finite()) fail<NumericError>("backward: objective is non-finite");
        for (std::size_t i = 0; i <= objective.idx; ++i) {
            Node& n = nodes_[i];
            if (n.needs_grad) n.grad = DenseMatrix(n.value.rows(), n.value.cols());
        }
        if (!nodes_[objective.idx].needs_grad) return;
        nodes_[objective.idx].grad(0, 0) = 1.0;
        for (std::size_t i = objective.idx + 1; i-- > 0;) {
            Node& n = nodes_[i];
            if (n.needs_grad && n.backward) n.backward(*this, n.grad);
        }
    }

    // Hash of the ReLU activation pattern seen so far; two evaluations of
    // the same computation can be compared to detect a crossed kink.
    std::uint64_t relu_pattern() const { return relu_pattern_; }

    std::size_t size() const { return nodes_.size(); }

private:
    struct Node {
        DenseMatrix value;
        DenseMatrix grad;
        std::function<void(Tape&, const DenseMatrix&)> backward;
        bool needs_grad = false;
        const char* op = "";
    };

    bool needs(Var a) const { return nodes_[a.idx].needs_grad; }
    bool needs(Var a, Var b) const { return needs(a) || needs(b); }

    void accumulate(Var v, DenseMatrix delta) {
        Node& n = nodes_[v.idx];
        if (!n.needs_grad) return;
        require_same_shape(n.grad, delta, "accumulate");
        for (std::size_t i = 0; i < delta.size(); ++i) n.grad.data()[i] += delta.data()[i];
    }

    Var push(const char* op, DenseMatrix value, bool needs_grad,
             std::function<void(Tape&, const DenseMatrix&)> backward) {
        if (!value.all_finite()) fail<NumericError>("non-finite value produced by op '", op, "'");
        Node n;
        n.value = std::move(value);
        n.backward = std::move(backward);
        n.needs_grad = needs_grad;
        n.op = op;
        nodes_.push_back(std::move(n));
        return Var{nodes_.size() - 1};
    }

    std::vector<Node> nodes_;
    std::uint64_t relu_pattern_ = 1469598103934665603ull;
};

// Scalar objective rebuilt from scratch on every call: given a tape and the
// parameter handles (in the same order as the parameter values), return the
// objective node.
using Objective = std::function<Var(Tape&, const std::vector<Var>&)>;

struct FdReport {
    double max_rel_error = 0.0;
    std::size_t checked = 0;
    std::size_t skipped = 0;  // entries whose central difference crossed a ReLU kink
};

namespace detail {

struct Eval {
    double value;
    std::uint64_t relu_pattern;
};

inline Eval evaluate(const Objective& f, const std::vector<DenseMatrix>& params) {
    Tape t;
    std::vector<Var> vs;
    vs.reserve(params.size());
    for (const auto& p : params) vs.push_back(t.constant(p));
    Var obj = f(t, vs);
    return {t.value_scalar(obj), t.relu_pattern()};
}

}  // namespace detail

// Compares reverse-mode gradients against central finite differences
// (f(x+eps) - f(x-eps)) / 2eps, entry by entry. Relative error is
// |ad - fd| / max(1, |ad|, |fd|). Entries whose +/-eps evaluations land on
// different sides of a ReLU kink are skipped and counted.
inline FdReport fd_check(const Objective& f, std::vector<DenseMatrix> params, double eps = 1e-6) {
    Tape t;
    std::vector<Var> vs;
    vs.reserve(params.size());
    for (const auto& p : params) vs.push_back(t.param(p));
    Var obj = f(t, vs);
    t.backward(obj);
    std::vector<DenseMatrix> grads;
    grads.reserve(params.size());
    for (Var v : vs) grads.push_back(t.grad(v));

    FdReport report;
    for (std::size_t p = 0; p < params.size(); ++p) {
        for (std::size_t e = 0; e < params[p].size(); ++e) {
            const double x0 = params[p].data()[e];
            params[p].data()[e] = x0 + eps;
            const auto plus = detail::evaluate(f, params);
            params[p].data()[e] = x0 - eps;
            const auto minus = detail::evaluate(f, params);
            params[p].data()[e] = x0;
            if (plus.relu_pattern != minus.relu_pattern) {
                report.skipped++;
                continue;
            }
            const double fd = (plus.value - minus.value) / (2.0 * eps);
            const double adg = grads[p].data()[e];
            const double denom = std::max({1.0, std::abs(fd), std::abs(adg)});
            report.max_rel_error = std::max(report.max_rel_error, std::abs(fd - adg) / denom);
            report.checked++;
        }
    }
    return report;
}

}  // namespace homogcl::ad
