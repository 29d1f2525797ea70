#pragma once

#include <cstddef>
#include <functional>
#include <memory>
#include <string>
#include <vector>

namespace pranet {

struct Shape {
    int n = 0, c = 0, h = 0, w = 0;

    long long numel() const {
        return static_cast<long long>(n) * c * static_cast<long long>(h) * w;
    }
    bool operator==(const Shape&) const = default;
    std::string str() const;
};

// Dense 4-D tensor (batch, channel, height, width), row-major. The gradient
// buffer stays empty until a backward pass first accumulates into it; an empty
// buffer reads as all zeros.
template <typename T>
struct TensorData {
    Shape shape;
    std::vector<T> v;
    std::vector<T> grad;
    bool requires_grad = false;
    bool leaf = true;  // created directly by the user, not by an op

    long long plane_stride() const { return static_cast<long long>(shape.h) * shape.w; }

    T* plane(int n, int c) {
        return v.data() + (static_cast<long long>(n) * shape.c + c) * plane_stride();
    }
    const T* plane(int n, int c) const {
        return v.data() + (static_cast<long long>(n) * shape.c + c) * plane_stride();
    }
    T* grad_plane(int n, int c) {
        return grad.data() + (static_cast<long long>(n) * shape.c + c) * plane_stride();
    }

    T& at(int n, int c, int h, int w) {
        return v[((static_cast<long long>(n) * shape.c + c) * shape.h + h) * shape.w + w];
    }
    T at(int n, int c, int h, int w) const {
        return v[((static_cast<long long>(n) * shape.c + c) * shape.h + h) * shape.w + w];
    }
    T grad_at(long long i) const { return grad.empty() ? T(0) : grad[i]; }

    void ensure_grad() {
        if (grad.empty()) grad.assign(v.size(), T(0));
    }
};

template <typename T>
using TensorPtr = std::shared_ptr<TensorData<T>>;

template <typename T>
TensorPtr<T> make_tensor(Shape s, T fill = T(0), bool requires_grad = false);

template <typename T>
void check_finite(const TensorData<T>& t, const char* op);

// Reverse-mode tape. Ops append one backward step each while recording is on;
// steps are created strictly after the steps that produced their inputs, so
// replaying the list newest-first is a valid topological order and touches
// every recorded op exactly once.
template <typename T>
class Tape {
public:
    bool recording() const { return recording_; }
    void set_recording(bool r) { recording_ = r; }

    void record(std::function<void()> step) { steps_.push_back(std::move(step)); }
    std::size_t op_count() const { return steps_.size(); }

    // Seeds d(loss)/d(loss) = 1 and replays the tape in reverse. Gradients of
    // values used more than once accumulate.
    void backward(const TensorPtr<T>& loss);

private:
    std::vector<std::function<void()>> steps_;
    bool recording_ = true;
};

// ---- differentiable ops ---------------------------------------------------

// Cross-correlation, odd kernels only. bias may be null, otherwise [1,Cout,1,1].
template <typename T>
TensorPtr<T> conv2d(Tape<T>& tape, const TensorPtr<T>& input, const TensorPtr<T>& weight,
                    const TensorPtr<T>& bias, int stride, int padding);

// Half-pixel-center sampling: src = (dst + 0.5) * (srcExtent / dstExtent) - 0.5,
// clamped to [0, srcExtent - 1].
template <typename T>
TensorPtr<T> bilinear_resize(Tape<T>& tape, const TensorPtr<T>& input, int out_h, int out_w);

// Binary ops accept equal shapes, or one [N,1,H,W] operand broadcast across
// the channels of an [N,C,H,W] operand.
template <typename T>
TensorPtr<T> add(Tape<T>& tape, const TensorPtr<T>& a, const TensorPtr<T>& b);
template <typename T>
TensorPtr<T> sub(Tape<T>& tape, const TensorPtr<T>& a, const TensorPtr<T>& b);
template <typename T>
TensorPtr<T> mul(Tape<T>& tape, const TensorPtr<T>& a, const TensorPtr<T>& b);

template <typename T>
TensorPtr<T> sigmoid(Tape<T>& tape, const TensorPtr<T>& x);
// subgradient at 0 is 0
template <typename T>
TensorPtr<T> relu(Tape<T>& tape, const TensorPtr<T>& x);
template <typename T>
TensorPtr<T> scale(Tape<T>& tape, const TensorPtr<T>& x, T k);

template <typename T>
TensorPtr<T> concat_channels(Tape<T>& tape, const std::vector<TensorPtr<T>>& parts);

template <typename T>
TensorPtr<T> sum_all(Tape<T>& tape, const TensorPtr<T>& x);

// ---- optimizer ------------------------------------------------------------

template <typename T>
struct AdamState {
    std::vector<std::vector<T>> m, v;  // one buffer per parameter
    long long t = 0;
};

// m <- b1*m + (1-b1)*g;  v <- b2*v + (1-b2)*g^2;  t <- t+1;
// theta <- theta - lr * (m/(1-b1^t)) / (sqrt(v/(1-b2^t)) + eps).
// A missing gradient buffer counts as zero. Any non-finite gradient refuses
// the whole step and leaves parameters and state untouched.
template <typename T>
void adam_step(const std::vector<TensorPtr<T>>& params, AdamState<T>& state, T lr,
               T beta1 = T(0.9), T beta2 = T(0.999), T eps = T(1e-8));

using TensorF = TensorData<float>;
using TensorPtrF = TensorPtr<float>;
using TapeF = Tape<float>;

}  // namespace pranet
