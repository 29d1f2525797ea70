#include "pranet/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "pranet/errors.hpp"

namespace pranet {

std::string Shape::str() const {
    std::ostringstream os;
    os << "[" << n << "," << c << "," << h << "," << w << "]";
    return os.str();
}

template <typename T>
TensorPtr<T> make_tensor(Shape s, T fill, bool requires_grad) {
    if (s.n < 0 || s.c < 0 || s.h < 0 || s.w < 0)
        throw InvalidArgument("tensor shape has a negative extent " + s.str());
    auto t = std::make_shared<TensorData<T>>();
    t->shape = s;
    t->v.assign(static_cast<std::size_t>(s.numel()), fill);
    t->requires_grad = requires_grad;
    return t;
}

template <typename T>
void check_finite(const TensorData<T>& t, const char* op) {
    for (const T& x : t.v)
        if (!std::isfinite(x))
            throw NumericError(std::string(op) + " produced a non-finite value");
}

namespace {

template <typename T>
TensorPtr<T> op_output(Shape s) {
    auto t = make_tensor<T>(s);
    t->leaf = false;
    return t;
}

// input gradient is skipped for leaves that do not ask for one
template <typename T>
bool wants_grad(const TensorPtr<T>& t) {
    return !t->leaf || t->requires_grad;
}

// inclusive range of output positions whose sampled input index
// o*stride - pad + k stays inside [0, extent_in)
struct OutRange {
    int lo, hi;
};

OutRange valid_out_range(int extent_in, int extent_out, int stride, int pad, int k) {
    long long q = static_cast<long long>(pad) - k;
    int lo = q <= 0 ? 0 : static_cast<int>((q + stride - 1) / stride);
    long long top = static_cast<long long>(extent_in) - 1 + pad - k;
    int hi = top < 0 ? -1 : static_cast<int>(top / stride);
    hi = std::min(hi, extent_out - 1);
    return {lo, hi};
}

template <typename T>
double sigmoid_scalar(T x) {
    double xd = static_cast<double>(x);
    if (xd >= 0.0) return 1.0 / (1.0 + std::exp(-xd));
    double e = std::exp(xd);
    return e / (1.0 + e);
}

}  // namespace

template <typename T>
void Tape<T>::backward(const TensorPtr<T>& loss) {
    if (loss->shape.numel() != 1)
        throw InvalidArgument("backward expects a scalar loss, got shape " + loss->shape.str());
    loss->ensure_grad();
    loss->grad[0] += T(1);
    for (auto it = steps_.rbegin(); it != steps_.rend(); ++it) (*it)();
}

// ---- conv2d ---------------------------------------------------------------

template <typename T>
TensorPtr<T> conv2d(Tape<T>& tape, const TensorPtr<T>& input, const TensorPtr<T>& weight,
                    const TensorPtr<T>& bias, int stride, int padding) {
    const Shape xs = input->shape, ws = weight->shape;
    if (ws.h % 2 == 0 || ws.w % 2 == 0)
        throw InvalidArgument("conv2d kernel extents must be odd, got " + ws.str());
    if (xs.c != ws.c)
        throw InvalidArgument("conv2d channel mismatch: input " + xs.str() + " vs weight " +
                              ws.str());
    if (stride < 1) throw InvalidArgument("conv2d stride must be positive");
    if (padding < 0) throw InvalidArgument("conv2d padding must be non-negative");
    if (xs.h + 2 * padding < ws.h || xs.w + 2 * padding < ws.w)
        throw InvalidArgument("conv2d kernel larger than padded input");
    if (bias && !(bias->shape == Shape{1, ws.n, 1, 1}))
        throw InvalidArgument("conv2d bias must be [1,Cout,1,1], got " + bias->shape.str());

    const int N = xs.n, Cin = xs.c, H = xs.h, W = xs.w;
    const int Cout = ws.n, kH = ws.h, kW = ws.w;
    const int Hout = (H + 2 * padding - kH) / stride + 1;
    const int Wout = (W + 2 * padding - kW) / stride + 1;
    auto out = op_output<T>({N, Cout, Hout, Wout});

    for (int n = 0; n < N; ++n) {
        for (int co = 0; co < Cout; ++co) {
            T* op = out->plane(n, co);
            const T bv = bias ? bias->v[co] : T(0);
            std::fill(op, op + static_cast<long long>(Hout) * Wout, bv);
            for (int ci = 0; ci < Cin; ++ci) {
                const T* ip = input->plane(n, ci);
                const T* wp = weight->plane(co, ci);
                for (int kh = 0; kh < kH; ++kh) {
                    const OutRange rh = valid_out_range(H, Hout, stride, padding, kh);
                    for (int kw = 0; kw < kW; ++kw) {
                        const T wv = wp[kh * kW + kw];
                        const OutRange rw = valid_out_range(W, Wout, stride, padding, kw);
                        for (int oh = rh.lo; oh <= rh.hi; ++oh) {
                            const int ih = oh * stride - padding + kh;
                            const T* irow = ip + static_cast<long long>(ih) * W - padding + kw;
                            T* orow = op + static_cast<long long>(oh) * Wout;
                            if (stride == 1) {
                                for (int ow = rw.lo; ow <= rw.hi; ++ow)
                                    orow[ow] += wv * irow[ow];
                            } else {
                                for (int ow = rw.lo; ow <= rw.hi; ++ow)
                                    orow[ow] += wv * irow[static_cast<long long>(ow) * stride];
                            }
                        }
                    }
                }
            }
        }
    }
    check_finite(*out, "conv2d");

    if (tape.recording()) {
        tape.record([input, weight, bias, out, stride, padding]() {
            if (out->grad.empty()) return;
            const Shape xs = input->shape, ws = weight->shape;
            const int N = xs.n, Cin = xs.c, H = xs.h, W = xs.w;
            const int Cout = ws.n, kH = ws.h, kW = ws.w;
            const int Hout = out->shape.h, Wout = out->shape.w;

            if (bias && wants_grad(bias)) {
                bias->ensure_grad();
                for (int n = 0; n < N; ++n)
                    for (int co = 0; co < Cout; ++co) {
                        const T* gp = out->grad.data() +
                                      (static_cast<long long>(n) * Cout + co) * Hout * Wout;
                        T acc = T(0);
                        for (long long i = 0; i < static_cast<long long>(Hout) * Wout; ++i)
                            acc += gp[i];
                        bias->grad[co] += acc;
                    }
            }
            if (wants_grad(weight)) {
                weight->ensure_grad();
                for (int n = 0; n < N; ++n)
                    for (int co = 0; co < Cout; ++co) {
                        const T* gp = out->grad.data() +
                                      (static_cast<long long>(n) * Cout + co) * Hout * Wout;
                        for (int ci = 0; ci < Cin; ++ci) {
                            const T* ip = input->plane(n, ci);
                            T* wg = weight->grad.data() +
                                    (static_cast<long long>(co) * Cin + ci) * kH * kW;
                            for (int kh = 0; kh < kH; ++kh) {
                                const OutRange rh =
                                    valid_out_range(H, Hout, stride, padding, kh);
                                for (int kw = 0; kw < kW; ++kw) {
                                    const OutRange rw =
                                        valid_out_range(W, Wout, stride, padding, kw);
                                    T acc = T(0);
                                    for (int oh = rh.lo; oh <= rh.hi; ++oh) {
                                        const int ih = oh * stride - padding + kh;
                                        const T* irow =
                                            ip + static_cast<long long>(ih) * W - padding + kw;
                                        const T* grow = gp + static_cast<long long>(oh) * Wout;
                                        if (stride == 1) {
                                            for (int ow = rw.lo; ow <= rw.hi; ++ow)
                                                acc += grow[ow] * irow[ow];
                                        } else {
                                            for (int ow = rw.lo; ow <= rw.hi; ++ow)
                                                acc += grow[ow] *
                                                       irow[static_cast<long long>(ow) * stride];
                                        }
                                    }
                                    wg[kh * kW + kw] += acc;
                                }
                            }
                        }
                    }
            }
            if (wants_grad(input)) {
                input->ensure_grad();
                for (int n = 0; n < N; ++n)
                    for (int ci = 0; ci < Cin; ++ci) {
                        T* xg = input->grad.data() +
                                (static_cast<long long>(n) * Cin + ci) * H * W;
                        for (int co = 0; co < Cout; ++co) {
                            const T* gp = out->grad.data() +
                                          (static_cast<long long>(n) * Cout + co) * Hout * Wout;
                            const T* wp = weight->plane(co, ci);
                            for (int kh = 0; kh < kH; ++kh) {
                                const OutRange rh =
                                    valid_out_range(H, Hout, stride, padding, kh);
                                for (int kw = 0; kw < kW; ++kw) {
                                    const T wv = wp[kh * kW + kw];
                                    const OutRange rw =
                                        valid_out_range(W, Wout, stride, padding, kw);
                                    for (int oh = rh.lo; oh <= rh.hi; ++oh) {
                                        const int ih = oh * stride - padding + kh;
                                        T* xrow =
                                            xg + static_cast<long long>(ih) * W - padding + kw;
                                        const T* grow = gp + static_cast<long long>(oh) * Wout;
                                        if (stride == 1) {
                                            for (int ow = rw.lo; ow <= rw.hi; ++ow)
                                                xrow[ow] += wv * grow[ow];
                                        } else {
                                            for (int ow = rw.lo; ow <= rw.hi; ++ow)
                                                xrow[static_cast<long long>(ow) * stride] +=
                                                    wv * grow[ow];
                                        }
                                    }
                                }
                            }
                        }
                    }
            }
        });
    }
    return out;
}

// ---- bilinear_resize -------------------------------------------------------

namespace {

struct LerpAxis {
    int i0, i1;
    double f;  // blend toward i1
};

LerpAxis lerp_axis(int dst, int dst_extent, int src_extent) {
    double s = (dst + 0.5) * (static_cast<double>(src_extent) / dst_extent) - 0.5;
    s = std::min(std::max(s, 0.0), static_cast<double>(src_extent - 1));
    int i0 = static_cast<int>(std::floor(s));
    double f = s - i0;
    int i1 = std::min(i0 + 1, src_extent - 1);
    return {i0, i1, f};
}

}  // namespace

template <typename T>
TensorPtr<T> bilinear_resize(Tape<T>& tape, const TensorPtr<T>& input, int out_h, int out_w) {
    if (out_h < 1 || out_w < 1)
        throw InvalidArgument("bilinear_resize output extents must be at least 1");
    const Shape xs = input->shape;
    auto out = op_output<T>({xs.n, xs.c, out_h, out_w});

    std::vector<LerpAxis> ys(out_h), xcs(out_w);
    for (int oy = 0; oy < out_h; ++oy) ys[oy] = lerp_axis(oy, out_h, xs.h);
    for (int ox = 0; ox < out_w; ++ox) xcs[ox] = lerp_axis(ox, out_w, xs.w);

    for (int n = 0; n < xs.n; ++n)
        for (int c = 0; c < xs.c; ++c) {
            const T* ip = input->plane(n, c);
            T* op = out->plane(n, c);
            for (int oy = 0; oy < out_h; ++oy) {
                const LerpAxis& ay = ys[oy];
                const T* r0 = ip + static_cast<long long>(ay.i0) * xs.w;
                const T* r1 = ip + static_cast<long long>(ay.i1) * xs.w;
                T* orow = op + static_cast<long long>(oy) * out_w;
                for (int ox = 0; ox < out_w; ++ox) {
                    const LerpAxis& ax = xcs[ox];
                    if (ay.f == 0.0 && ax.f == 0.0) {
                        orow[ox] = r0[ax.i0];  // exact pass-through, identity stays bitwise
                    } else {
                        double top = (1.0 - ax.f) * r0[ax.i0] + ax.f * r0[ax.i1];
                        double bot = (1.0 - ax.f) * r1[ax.i0] + ax.f * r1[ax.i1];
                        orow[ox] = static_cast<T>((1.0 - ay.f) * top + ay.f * bot);
                    }
                }
            }
        }
    check_finite(*out, "bilinear_resize");

    if (tape.recording() && wants_grad(input)) {
        tape.record([input, out, ys, xcs]() {
            if (out->grad.empty()) return;
            input->ensure_grad();
            const Shape xs = input->shape;
            const int out_h = out->shape.h, out_w = out->shape.w;
            for (int n = 0; n < xs.n; ++n)
                for (int c = 0; c < xs.c; ++c) {
                    T* xg = input->grad.data() +
                            (static_cast<long long>(n) * xs.c + c) * xs.h * xs.w;
                    const T* gp = out->grad.data() +
                                  (static_cast<long long>(n) * xs.c + c) * out_h * out_w;
                    for (int oy = 0; oy < out_h; ++oy) {
                        const LerpAxis& ay = ys[oy];
                        for (int ox = 0; ox < out_w; ++ox) {
                            const LerpAxis& ax = xcs[ox];
                            const double g = gp[static_cast<long long>(oy) * out_w + ox];
                            xg[static_cast<long long>(ay.i0) * xs.w + ax.i0] +=
                                static_cast<T>((1.0 - ay.f) * (1.0 - ax.f) * g);
                            xg[static_cast<long long>(ay.i0) * xs.w + ax.i1] +=
                                static_cast<T>((1.0 - ay.f) * ax.f * g);
                            xg[static_cast<long long>(ay.i1) * xs.w + ax.i0] +=
                                static_cast<T>(ay.f * (1.0 - ax.f) * g);
                            xg[static_cast<long long>(ay.i1) * xs.w + ax.i1] +=
                                static_cast<T>(ay.f * ax.f * g);
                        }
                    }
                }
        });
    }
    return out;
}

// ---- elementwise -----------------------------------------------------------

namespace {

enum class BinKind { Add, Sub, Mul };

template <typename T>
void require_broadcastable(const TensorPtr<T>& a, const TensorPtr<T>& b, const char* op) {
    const Shape& s = a->shape;
    const Shape& t = b->shape;
    bool ok = s.n == t.n && s.h == t.h && s.w == t.w && (s.c == t.c || s.c == 1 || t.c == 1);
    if (!ok)
        throw InvalidArgument(std::string(op) + ": shapes " + s.str() + " and " + t.str() +
                              " are not broadcastable");
}

// accumulates grad g over the output layout into the (possibly channel-
// broadcast) operand's gradient; factor == nullptr means accumulate g itself
template <typename T, typename F>
void scatter_binary_grad(const TensorPtr<T>& operand, const TensorPtr<T>& out, F contribution) {
    operand->ensure_grad();
    const Shape os = out->shape;
    const bool bcast = operand->shape.c == 1 && os.c != 1;
    const long long ps = static_cast<long long>(os.h) * os.w;
    for (int n = 0; n < os.n; ++n)
        for (int c = 0; c < os.c; ++c) {
            const long long obase = (static_cast<long long>(n) * os.c + c) * ps;
            T* gdst = operand->grad.data() +
                      (static_cast<long long>(n) * operand->shape.c + (bcast ? 0 : c)) * ps;
            for (long long i = 0; i < ps; ++i) gdst[i] += contribution(obase + i);
        }
}

template <typename T>
TensorPtr<T> binary_op(Tape<T>& tape, const TensorPtr<T>& a, const TensorPtr<T>& b, BinKind kind,
                       const char* name) {
    require_broadcastable(a, b, name);
    const int C = std::max(a->shape.c, b->shape.c);
    const Shape os{a->shape.n, C, a->shape.h, a->shape.w};
    auto out = op_output<T>(os);
    const long long ps = static_cast<long long>(os.h) * os.w;
    for (int n = 0; n < os.n; ++n)
        for (int c = 0; c < C; ++c) {
            const T* ap = a->plane(n, a->shape.c == 1 ? 0 : c);
            const T* bp = b->plane(n, b->shape.c == 1 ? 0 : c);
            T* op = out->plane(n, c);
            switch (kind) {
                case BinKind::Add:
                    for (long long i = 0; i < ps; ++i) op[i] = ap[i] + bp[i];
                    break;
                case BinKind::Sub:
                    for (long long i = 0; i < ps; ++i) op[i] = ap[i] - bp[i];
                    break;
                case BinKind::Mul:
                    for (long long i = 0; i < ps; ++i) op[i] = ap[i] * bp[i];
                    break;
            }
        }
    check_finite(*out, name);

    if (tape.recording()) {
        tape.record([a, b, out, kind]() {
            if (out->grad.empty()) return;
            const Shape os = out->shape;
            const long long ps = static_cast<long long>(os.h) * os.w;
            auto operand_value = [&](const TensorPtr<T>& t, long long oi) {
                if (t->shape.c == os.c) return t->v[oi];
                // map output index back to the c==1 operand
                const long long within = oi % ps;
                const long long n = oi / (ps * os.c);
                return t->v[n * ps + within];
            };
            if (wants_grad(a)) {
                switch (kind) {
                    case BinKind::Add:
                    case BinKind::Sub:
                        scatter_binary_grad(a, out, [&](long long oi) { return out->grad[oi]; });
                        break;
                    case BinKind::Mul:
                        scatter_binary_grad(a, out, [&](long long oi) {
                            return out->grad[oi] * operand_value(b, oi);
                        });
                        break;
                }
            }
            if (wants_grad(b)) {
                switch (kind) {
                    case BinKind::Add:
                        scatter_binary_grad(b, out, [&](long long oi) { return out->grad[oi]; });
                        break;
                    case BinKind::Sub:
                        scatter_binary_grad(b, out, [&](long long oi) { return -out->grad[oi]; });
                        break;
                    case BinKind::Mul:
                        scatter_binary_grad(b, out, [&](long long oi) {
                            return out->grad[oi] * operand_value(a, oi);
                        });
                        break;
                }
            }
        });
    }
    return out;
}

}  // namespace

template <typename T>
TensorPtr<T> add(Tape<T>& tape, const TensorPtr<T>& a, const TensorPtr<T>& b) {
    return binary_op(tape, a, b, BinKind::Add, "add");
}
template <typename T>
TensorPtr<T> sub(Tape<T>& tape, const TensorPtr<T>& a, const TensorPtr<T>& b) {
    return binary_op(tape, a, b, BinKind::Sub, "sub");
}
template <typename T>
TensorPtr<T> mul(Tape<T>& tape, const TensorPtr<T>& a, const TensorPtr<T>& b) {
    return binary_op(tape, a, b, BinKind::Mul, "mul");
}

template <typename T>
TensorPtr<T> sigmoid(Tape<T>& tape, const TensorPtr<T>& x) {
    auto out = op_output<T>(x->shape);
    for (std::size_t i = 0; i < x->v.size(); ++i)
        out->v[i] = static_cast<T>(sigmoid_scalar(x->v[i]));
    check_finite(*out, "sigmoid");
    if (tape.recording() && wants_grad(x)) {
        tape.record([x, out]() {
            if (out->grad.empty()) return;
            x->ensure_grad();
            for (std::size_t i = 0; i < x->v.size(); ++i) {
                const T y = out->v[i];
                x->grad[i] += out->grad[i] * y * (T(1) - y);
            }
        });
    }
    return out;
}

template <typename T>
TensorPtr<T> relu(Tape<T>& tape, const TensorPtr<T>& x) {
    auto out = op_output<T>(x->shape);
    for (std::size_t i = 0; i < x->v.size(); ++i) out->v[i] = x->v[i] > T(0) ? x->v[i] : T(0);
    check_finite(*out, "relu");
    if (tape.recording() && wants_grad(x)) {
        tape.record([x, out]() {
            if (out->grad.empty()) return;
            x->ensure_grad();
            for (std::size_t i = 0; i < x->v.size(); ++i)
                if (x->v[i] > T(0)) x->grad[i] += out->grad[i];
        });
    }
    return out;
}

template <typename T>
TensorPtr<T> scale(Tape<T>& tape, const TensorPtr<T>& x, T k) {
    auto out = op_output<T>(x->shape);
    for (std::size_t i = 0; i < x->v.size(); ++i) out->v[i] = x->v[i] * k;
    check_finite(*out, "scale");
    if (tape.recording() && wants_grad(x)) {
        tape.record([x, out, k]() {
            if (out->grad.empty()) return;
            x->ensure_grad();
            for (std::size_t i = 0; i < x->v.size(); ++i) x->grad[i] += out->grad[i] * k;
        });
    }
    return out;
}

template <typename T>
TensorPtr<T> concat_channels(Tape<T>& tape, const std::vector<TensorPtr<T>>& parts) {
    if (parts.empty()) throw InvalidArgument("concat_channels needs at least one tensor");
    const Shape first = parts[0]->shape;
    int ctotal = 0;
    for (const auto& p : parts) {
        const Shape& s = p->shape;
        if (s.n != first.n || s.h != first.h || s.w != first.w)
            throw InvalidArgument("concat_channels spatial/batch mismatch: " + first.str() +
                                  " vs " + s.str());
        ctotal += s.c;
    }
    auto out = op_output<T>({first.n, ctotal, first.h, first.w});
    const long long ps = static_cast<long long>(first.h) * first.w;
    for (int n = 0; n < first.n; ++n) {
        int co = 0;
        for (const auto& p : parts)
            for (int c = 0; c < p->shape.c; ++c, ++co)
                std::copy(p->plane(n, c), p->plane(n, c) + ps, out->plane(n, co));
    }

    if (tape.recording()) {
        tape.record([parts, out]() {
            if (out->grad.empty()) return;
            const Shape os = out->shape;
            const long long ps = static_cast<long long>(os.h) * os.w;
            for (int n = 0; n < os.n; ++n) {
                int co = 0;
                for (const auto& p : parts) {
                    if (!wants_grad(p)) {
                        co += p->shape.c;
                        continue;
                    }
                    p->ensure_grad();
                    for (int c = 0; c < p->shape.c; ++c, ++co) {
                        const T* g = out->grad.data() +
                                     (static_cast<long long>(n) * os.c + co) * ps;
                        T* pg = p->grad.data() +
                                (static_cast<long long>(n) * p->shape.c + c) * ps;
                        for (long long i = 0; i < ps; ++i) pg[i] += g[i];
                    }
                }
            }
        });
    }
    return out;
}

template <typename T>
TensorPtr<T> sum_all(Tape<T>& tape, const TensorPtr<T>& x) {
    auto out = op_output<T>({1, 1, 1, 1});
    double acc = 0.0;
    for (const T& v : x->v) acc += static_cast<double>(v);
    out->v[0] = static_cast<T>(acc);
    check_finite(*out, "sum_all");
    if (tape.recording() && wants_grad(x)) {
        tape.record([x, out]() {
            if (out->grad.empty()) return;
            x->ensure_grad();
            const T g = out->grad[0];
            for (std::size_t i = 0; i < x->grad.size(); ++i) x->grad[i] += g;
        });
    }
    return out;
}

// ---- Adam ------------------------------------------------------------------

template <typename T>
void adam_step(const std::vector<TensorPtr<T>>& params, AdamState<T>& state, T lr, T beta1,
               T beta2, T eps) {
    if (lr <= T(0)) throw InvalidArgument("adam_step learning rate must be positive");
    if (state.t == 0 && state.m.empty()) {
        state.m.resize(params.size());
        state.v.resize(params.size());
        for (std::size_t i = 0; i < params.size(); ++i) {
            state.m[i].assign(params[i]->v.size(), T(0));
            state.v[i].assign(params[i]->v.size(), T(0));
        }
    }
    if (state.m.size() != params.size())
        throw InvalidArgument("adam_step state does not match the parameter list");
    for (std::size_t i = 0; i < params.size(); ++i) {
        if (state.m[i].size() != params[i]->v.size())
            throw InvalidArgument("adam_step state shape mismatch for parameter " +
                                  std::to_string(i));
        for (const T& g : params[i]->grad)
            if (!std::isfinite(g))
                throw NumericError("adam_step refused: non-finite gradient in parameter " +
                                   std::to_string(i));
    }

    state.t += 1;
    const double bc1 = 1.0 - std::pow(static_cast<double>(beta1), static_cast<double>(state.t));
    const double bc2 = 1.0 - std::pow(static_cast<double>(beta2), static_cast<double>(state.t));
    for (std::size_t i = 0; i < params.size(); ++i) {
        auto& p = *params[i];
        T* m = state.m[i].data();
        T* v = state.v[i].data();
        for (std::size_t j = 0; j < p.v.size(); ++j) {
            const T g = p.grad.empty() ? T(0) : p.grad[j];
            m[j] = beta1 * m[j] + (T(1) - beta1) * g;
            v[j] = beta2 * v[j] + (T(1) - beta2) * g * g;
            const T mhat = static_cast<T>(m[j] / bc1);
            const T vhat = static_cast<T>(v[j] / bc2);
            p.v[j] -= lr * mhat / (std::sqrt(vhat) + eps);
        }
    }
}

// ---- explicit instantiations ------------------------------------------------

#define PRANET_INSTANTIATE_TENSOR(T)                                                            \
    template TensorPtr<T> make_tensor<T>(Shape, T, bool);                                       \
    template void check_finite<T>(const TensorData<T>&, const char*);                           \
    template class Tape<T>;                                                                     \
    template TensorPtr<T> conv2d<T>(Tape<T>&, const TensorPtr<T>&, const TensorPtr<T>&,         \
                                    const TensorPtr<T>&, int, int);                             \
    template TensorPtr<T> bilinear_resize<T>(Tape<T>&, const TensorPtr<T>&, int, int);          \
    template TensorPtr<T> add<T>(Tape<T>&, const TensorPtr<T>&, const TensorPtr<T>&);           \
    template TensorPtr<T> sub<T>(Tape<T>&, const TensorPtr<T>&, const TensorPtr<T>&);           \
    template TensorPtr<T> mul<T>(Tape<T>&, const TensorPtr<T>&, const TensorPtr<T>&);           \
    template TensorPtr<T> sigmoid<T>(Tape<T>&, const TensorPtr<T>&);                            \
    template TensorPtr<T> relu<T>(Tape<T>&, const TensorPtr<T>&);                               \
    template TensorPtr<T> scale<T>(Tape<T>&, const TensorPtr<T>&, T);                           \
    template TensorPtr<T> concat_channels<T>(Tape<T>&, const std::vector<TensorPtr<T>>&);       \
    template TensorPtr<T> sum_all<T>(Tape<T>&, const TensorPtr<T>&);                            \
    template void adam_step<T>(const std::vector<TensorPtr<T>>&, AdamState<T>&, T, T, T, T);

PRANET_INSTANTIATE_TENSOR(float)
PRANET_INSTANTIATE_TENSOR(double)

#undef PRANET_INSTANTIATE_TENSOR

}  // namespace pranet
