#include "risctl/nn/tape.hpp"

#include <cmath>

namespace risctl::nn {

namespace {

void matmul_acc(const Tensor& a, const Tensor& b, Tensor& out, bool transpose_a,
                bool transpose_b) {
    // out += op(a) * op(b), i-k-j loop order on the untransposed layout
    const int m = transpose_a ? a.cols : a.rows;
    const int kk = transpose_a ? a.rows : a.cols;
    const int n = transpose_b ? b.rows : b.cols;
    for (int i = 0; i < m; ++i) {
        for (int k = 0; k < kk; ++k) {
            const double av = transpose_a ? a.at(k, i) : a.at(i, k);
            if (av == 0.0) continue;
            for (int j = 0; j < n; ++j) {
                const double bv = transpose_b ? b.at(j, k) : b.at(k, j);
                out.at(i, j) += av * bv;
            }
        }
    }
}

}  // namespace

Tape::Var Tape::push(Tensor value, std::function<void(Tape&, Node&)> backward) {
    Node n;
    n.value = std::move(value);
    n.backward = std::move(backward);
    nodes_.push_back(std::move(n));
    return static_cast<Var>(nodes_.size()) - 1;
}

Tape::Var Tape::param(ParamTensor& p) {
    auto it = param_vars_.find(&p);
    if (it != param_vars_.end()) return it->second;
    Var v = push(p.value, nullptr);
    nodes_[v].leaf = &p;
    param_vars_.emplace(&p, v);
    return v;
}

Tape::Var Tape::constant(Tensor t) { return push(std::move(t), nullptr); }

Tape::Var Tape::matmul(Var a, Var b) {
    const Tensor& A = nodes_[a].value;
    const Tensor& B = nodes_[b].value;
    require(A.cols == B.rows, "matmul: inner dimensions differ");
    Tensor out(A.rows, B.cols);
    matmul_acc(A, B, out, false, false);
    return push(std::move(out), [a, b](Tape& t, Node& n) {
        // dA += dC * B^T ; dB += A^T * dC
        matmul_acc(n.grad, t.node(b).value, t.node(a).grad, false, true);
        matmul_acc(t.node(a).value, n.grad, t.node(b).grad, true, false);
    });
}

Tape::Var Tape::matmul_nt(Var a, Var b) {
    const Tensor& A = nodes_[a].value;
    const Tensor& B = nodes_[b].value;
    require(A.cols == B.cols, "matmul_nt: inner dimensions differ");
    Tensor out(A.rows, B.rows);
    matmul_acc(A, B, out, false, true);
    return push(std::move(out), [a, b](Tape& t, Node& n) {
        // C = A B^T : dA += dC * B ; dB += dC^T * A
        matmul_acc(n.grad, t.node(b).value, t.node(a).grad, false, false);
        matmul_acc(n.grad, t.node(a).value, t.node(b).grad, true, false);
    });
}

Tape::Var Tape::add(Var a, Var b) {
    const Tensor& A = nodes_[a].value;
    const Tensor& B = nodes_[b].value;
    require(A.same_shape(B), "add: shape mismatch");
    Tensor out = A;
    for (int i = 0; i < out.size(); ++i) out.data[i] += B.data[i];
    return push(std::move(out), [a, b](Tape& t, Node& n) {
        Tensor& da = t.node(a).grad;
        Tensor& db = t.node(b).grad;
        for (int i = 0; i < n.grad.size(); ++i) {
            da.data[i] += n.grad.data[i];
            db.data[i] += n.grad.data[i];
        }
    });
}

Tape::Var Tape::sub(Var a, Var b) {
    const Tensor& A = nodes_[a].value;
    const Tensor& B = nodes_[b].value;
    require(A.same_shape(B), "sub: shape mismatch");
    Tensor out = A;
    for (int i = 0; i < out.size(); ++i) out.data[i] -= B.data[i];
    return push(std::move(out), [a, b](Tape& t, Node& n) {
        Tensor& da = t.node(a).grad;
        Tensor& db = t.node(b).grad;
        for (int i = 0; i < n.grad.size(); ++i) {
            da.data[i] += n.grad.data[i];
            db.data[i] -= n.grad.data[i];
        }
    });
}

Tape::Var Tape::mul(Var a, Var b) {
    const Tensor& A = nodes_[a].value;
    const Tensor& B = nodes_[b].value;
    require(A.same_shape(B), "mul: shape mismatch");
    Tensor out = A;
    for (int i = 0; i < out.size(); ++i) out.data[i] *= B.data[i];
    return push(std::move(out), [a, b](Tape& t, Node& n) {
        Tensor& da = t.node(a).grad;
        Tensor& db = t.node(b).grad;
        const Tensor& av = t.node(a).value;
        const Tensor& bv = t.node(b).value;
        for (int i = 0; i < n.grad.size(); ++i) {
            da.data[i] += n.grad.data[i] * bv.data[i];
            db.data[i] += n.grad.data[i] * av.data[i];
        }
    });
}

Tape::Var Tape::scale(Var a, double s) {
    Tensor out = nodes_[a].value;
    for (double& v : out.data) v *= s;
    return push(std::move(out), [a, s](Tape& t, Node& n) {
        Tensor& da = t.node(a).grad;
        for (int i = 0; i < n.grad.size(); ++i) da.data[i] += s * n.grad.data[i];
    });
}

Tape::Var Tape::add_rowvec(Var a, Var bias) {
    const Tensor& A = nodes_[a].value;
    const Tensor& B = nodes_[bias].value;
    require(B.rows == 1 && B.cols == A.cols, "add_rowvec: bias must be 1 x cols");
    Tensor out = A;
    for (int r = 0; r < A.rows; ++r)
        for (int c = 0; c < A.cols; ++c) out.at(r, c) += B.at(0, c);
    return push(std::move(out), [a, bias](Tape& t, Node& n) {
        Tensor& da = t.node(a).grad;
        Tensor& db = t.node(bias).grad;
        for (int r = 0; r < n.grad.rows; ++r)
            for (int c = 0; c < n.grad.cols; ++c) {
                da.at(r, c) += n.grad.at(r, c);
                db.at(0, c) += n.grad.at(r, c);
            }
    });
}

Tape::Var Tape::tanh(Var a) {
    Tensor out = nodes_[a].value;
    for (double& v : out.data) v = std::tanh(v);
    return push(std::move(out), [a](Tape& t, Node& n) {
        Tensor& da = t.node(a).grad;
        for (int i = 0; i < n.grad.size(); ++i) {
            const double y = n.value.data[i];
            da.data[i] += n.grad.data[i] * (1.0 - y * y);
        }
    });
}

Tape::Var Tape::sigmoid(Var a) {
    Tensor out = nodes_[a].value;
    for (double& v : out.data) v = 1.0 / (1.0 + std::exp(-v));
    return push(std::move(out), [a](Tape& t, Node& n) {
        Tensor& da = t.node(a).grad;
        for (int i = 0; i < n.grad.size(); ++i) {
            const double y = n.value.data[i];
            da.data[i] += n.grad.data[i] * y * (1.0 - y);
        }
    });
}

Tape::Var Tape::softmax_rows(Var a) {
    Tensor out = nodes_[a].value;
    for (int r = 0; r < out.rows; ++r) {
        double mx = out.at(r, 0);
        for (int c = 1; c < out.cols; ++c) mx = std::max(mx, out.at(r, c));
        double sum = 0.0;
        for (int c = 0; c < out.cols; ++c) {
            out.at(r, c) = std::exp(out.at(r, c) - mx);
            sum += out.at(r, c);
        }
        for (int c = 0; c < out.cols; ++c) out.at(r, c) /= sum;
    }
    return push(std::move(out), [a](Tape& t, Node& n) {
        // per row: dx = y .* (dy - <y, dy>)
        Tensor& da = t.node(a).grad;
        for (int r = 0; r < n.value.rows; ++r) {
            double dot = 0.0;
            for (int c = 0; c < n.value.cols; ++c)
                dot += n.value.at(r, c) * n.grad.at(r, c);
            for (int c = 0; c < n.value.cols; ++c)
                da.at(r, c) += n.value.at(r, c) * (n.grad.at(r, c) - dot);
        }
    });
}

Tape::Var Tape::concat_rows(Var a, Var b) {
    const Tensor& A = nodes_[a].value;
    const Tensor& B = nodes_[b].value;
    require(A.cols == B.cols, "concat_rows: column counts differ");
    Tensor out(A.rows + B.rows, A.cols);
    std::copy(A.data.begin(), A.data.end(), out.data.begin());
    std::copy(B.data.begin(), B.data.end(), out.data.begin() + A.size());
    const int arows = A.rows;
    return push(std::move(out), [a, b, arows](Tape& t, Node& n) {
        Tensor& da = t.node(a).grad;
        Tensor& db = t.node(b).grad;
        for (int i = 0; i < da.size(); ++i) da.data[i] += n.grad.data[i];
        for (int i = 0; i < db.size(); ++i)
            db.data[i] += n.grad.data[i + arows * n.grad.cols];
    });
}

Tape::Var Tape::concat_cols(Var a, Var b) {
    const Tensor& A = nodes_[a].value;
    const Tensor& B = nodes_[b].value;
    require(A.rows == B.rows, "concat_cols: row counts differ");
    Tensor out(A.rows, A.cols + B.cols);
    for (int r = 0; r < A.rows; ++r) {
        for (int c = 0; c < A.cols; ++c) out.at(r, c) = A.at(r, c);
        for (int c = 0; c < B.cols; ++c) out.at(r, A.cols + c) = B.at(r, c);
    }
    const int acols = A.cols;
    return push(std::move(out), [a, b, acols](Tape& t, Node& n) {
        Tensor& da = t.node(a).grad;
        Tensor& db = t.node(b).grad;
        for (int r = 0; r < n.grad.rows; ++r) {
            for (int c = 0; c < acols; ++c) da.at(r, c) += n.grad.at(r, c);
            for (int c = 0; c < db.cols; ++c) db.at(r, c) += n.grad.at(r, acols + c);
        }
    });
}

Tape::Var Tape::slice_rows(Var a, int r0, int r1) {
    const Tensor& A = nodes_[a].value;
    require(0 <= r0 && r0 < r1 && r1 <= A.rows, "slice_rows: bad range");
    Tensor out(r1 - r0, A.cols);
    for (int r = r0; r < r1; ++r)
        for (int c = 0; c < A.cols; ++c) out.at(r - r0, c) = A.at(r, c);
    return push(std::move(out), [a, r0](Tape& t, Node& n) {
        Tensor& da = t.node(a).grad;
        for (int r = 0; r < n.grad.rows; ++r)
            for (int c = 0; c < n.grad.cols; ++c)
                da.at(r + r0, c) += n.grad.at(r, c);
    });
}

Tape::Var Tape::transpose(Var a) {
    const Tensor& A = nodes_[a].value;
    Tensor out(A.cols, A.rows);
    for (int r = 0; r < A.rows; ++r)
        for (int c = 0; c < A.cols; ++c) out.at(c, r) = A.at(r, c);
    return push(std::move(out), [a](Tape& t, Node& n) {
        Tensor& da = t.node(a).grad;
        for (int r = 0; r < n.grad.rows; ++r)
            for (int c = 0; c < n.grad.cols; ++c)
                da.at(c, r) += n.grad.at(r, c);
    });
}

Tape::Var Tape::sum_all(Var a) {
    double s = 0.0;
    for (double v : nodes_[a].value.data) s += v;
    Tensor out(1, 1);
    out.data[0] = s;
    return push(std::move(out), [a](Tape& t, Node& n) {
        Tensor& da = t.node(a).grad;
        for (double& v : da.data) v += n.grad.data[0];
    });
}

Tape::Var Tape::mean_all(Var a) {
    const int sz = nodes_[a].value.size();
    double s = 0.0;
    for (double v : nodes_[a].value.data) s += v;
    Tensor out(1, 1);
    out.data[0] = s / sz;
    return push(std::move(out), [a, sz](Tape& t, Node& n) {
        Tensor& da = t.node(a).grad;
        for (double& v : da.data) v += n.grad.data[0] / sz;
    });
}

Tape::Var Tape::block_normalize(Var x) {
    const Tensor& X = nodes_[x].value;
    require(X.cols == 1 && X.rows % 2 == 0, "block_normalize: need (2N x 1)");
    Tensor out = X;
    for (int b = 0; b < X.rows / 2; ++b) {
        const double nx = X.data[2 * b], ny = X.data[2 * b + 1];
        const double r = std::sqrt(nx * nx + ny * ny);
        if (r == 0.0)
            throw SingularProjection("block_normalize: zero-norm block " +
                                     std::to_string(b));
        out.data[2 * b] = nx / r;
        out.data[2 * b + 1] = ny / r;
    }
    return push(std::move(out), [x](Tape& t, Node& n) {
        // y = x/r : dx = (dY - y (y . dY)) / r per block
        Tensor& dx = t.node(x).grad;
        const Tensor& xv = t.node(x).value;
        for (int b = 0; b < n.value.rows / 2; ++b) {
            const double xa = xv.data[2 * b], xb = xv.data[2 * b + 1];
            const double r = std::sqrt(xa * xa + xb * xb);
            const double ya = n.value.data[2 * b], yb = n.value.data[2 * b + 1];
            const double ga = n.grad.data[2 * b], gb = n.grad.data[2 * b + 1];
            const double ydotg = ya * ga + yb * gb;
            dx.data[2 * b] += (ga - ya * ydotg) / r;
            dx.data[2 * b + 1] += (gb - yb * ydotg) / r;
        }
    });
}

Tape::Var Tape::tangent_project(Var x, Var xi) {
    const Tensor& X = nodes_[x].value;
    const Tensor& Xi = nodes_[xi].value;
    require(X.same_shape(Xi) && X.cols == 1 && X.rows % 2 == 0,
            "tangent_project: need matching (2N x 1)");
    Tensor out = Xi;
    for (int b = 0; b < X.rows / 2; ++b) {
        const double xa = X.data[2 * b], xb = X.data[2 * b + 1];
        const double ea = Xi.data[2 * b], eb = Xi.data[2 * b + 1];
        const double d = xa * ea + xb * eb;
        out.data[2 * b] = ea - d * xa;
        out.data[2 * b + 1] = eb - d * xb;
    }
    return push(std::move(out), [x, xi](Tape& t, Node& n) {
        // o = xi - (x.xi) x
        // dL/dxi = g - (x.g) x ;  dL/dx = -(g.x) xi - (x.xi) g
        Tensor& dx = t.node(x).grad;
        Tensor& dxi = t.node(xi).grad;
        const Tensor& xv = t.node(x).value;
        const Tensor& ev = t.node(xi).value;
        for (int b = 0; b < n.value.rows / 2; ++b) {
            const double xa = xv.data[2 * b], xb = xv.data[2 * b + 1];
            const double ea = ev.data[2 * b], eb = ev.data[2 * b + 1];
            const double ga = n.grad.data[2 * b], gb = n.grad.data[2 * b + 1];
            const double xdotg = xa * ga + xb * gb;
            const double xdote = xa * ea + xb * eb;
            dxi.data[2 * b] += ga - xdotg * xa;
            dxi.data[2 * b + 1] += gb - xdotg * xb;
            dx.data[2 * b] += -xdotg * ea - xdote * ga;
            dx.data[2 * b + 1] += -xdotg * eb - xdote * gb;
        }
    });
}

Tape::Var Tape::atan2_blocks(Var x) {
    const Tensor& X = nodes_[x].value;
    require(X.cols == 1 && X.rows % 2 == 0, "atan2_blocks: need (2N x 1)");
    Tensor out(X.rows / 2, 1);
    for (int b = 0; b < X.rows / 2; ++b) {
        double th = std::atan2(X.data[2 * b + 1], X.data[2 * b]);
        if (th < 0.0) th += 2.0 * M_PI;
        out.data[b] = th;
    }
    return push(std::move(out), [x](Tape& t, Node& n) {
        Tensor& dx = t.node(x).grad;
        const Tensor& xv = t.node(x).value;
        for (int b = 0; b < n.value.rows; ++b) {
            const double xa = xv.data[2 * b], xb = xv.data[2 * b + 1];
            const double r2 = xa * xa + xb * xb;
            dx.data[2 * b] += n.grad.data[b] * (-xb / r2);
            dx.data[2 * b + 1] += n.grad.data[b] * (xa / r2);
        }
    });
}

Tape::Var Tape::mse(Var pred, const Tensor& target) {
    Var tgt = constant(target);
    Var diff = sub(pred, tgt);
    return mean_all(mul(diff, diff));
}

void Tape::backward(Var loss) {
    require(nodes_[loss].value.size() == 1, "backward: loss must be scalar");
    for (Node& n : nodes_) {
        n.grad = Tensor(n.value.rows, n.value.cols);
    }
    nodes_[loss].grad.data[0] = 1.0;
    for (int i = static_cast<int>(nodes_.size()) - 1; i >= 0; --i) {
        if (nodes_[i].backward) nodes_[i].backward(*this, nodes_[i]);
    }
    for (Node& n : nodes_) {
        if (n.leaf) {
            for (int i = 0; i < n.grad.size(); ++i)
                n.leaf->grad.data[i] += n.grad.data[i];
        }
    }
}

void Tape::clear() {
    nodes_.clear();
    param_vars_.clear();
}

}  // namespace risctl::nn
