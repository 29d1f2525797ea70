#include "pranet/loss.hpp"

#include <cmath>
#include <vector>

#include "pranet/errors.hpp"

namespace pranet {

namespace {

template <typename T>
void require_binary_mask(const TensorPtr<T>& mask, const char* op) {
    if (mask->shape.c != 1)
        throw InvalidArgument(std::string(op) + ": mask must have one channel, got " +
                              mask->shape.str());
    for (const T& g : mask->v)
        if (g != T(0) && g != T(1))
            throw InvalidArgument(std::string(op) + ": mask is not {0,1}-valued");
}

template <typename T>
void require_same_shape(const TensorPtr<T>& a, const TensorPtr<T>& b, const char* op) {
    if (!(a->shape == b->shape))
        throw InvalidArgument(std::string(op) + ": shape mismatch " + a->shape.str() + " vs " +
                              b->shape.str());
}

template <typename T>
double stable_bce(T logit, T target) {
    const double x = static_cast<double>(logit);
    const double g = static_cast<double>(target);
    return std::max(x, 0.0) - x * g + std::log1p(std::exp(-std::abs(x)));
}

template <typename T>
double sigmoid_scalar(T x) {
    const double xd = static_cast<double>(x);
    if (xd >= 0.0) return 1.0 / (1.0 + std::exp(-xd));
    const double e = std::exp(xd);
    return e / (1.0 + e);
}

}  // namespace

template <typename T>
TensorPtr<T> pixel_weights(const TensorPtr<T>& mask) {
    require_binary_mask(mask, "pixel_weights");
    const int N = mask->shape.n, H = mask->shape.h, W = mask->shape.w;
    const int r = 15;  // half of the 31x31 window
    auto w = make_tensor<T>(mask->shape);

    // summed-area table per image, (H+1)x(W+1)
    std::vector<double> sat(static_cast<std::size_t>(H + 1) * (W + 1));
    for (int n = 0; n < N; ++n) {
        const T* g = mask->plane(n, 0);
        for (int y = 0; y < H; ++y)
            for (int x = 0; x < W; ++x)
                sat[static_cast<std::size_t>(y + 1) * (W + 1) + (x + 1)] =
                    static_cast<double>(g[static_cast<long long>(y) * W + x]) +
                    sat[static_cast<std::size_t>(y) * (W + 1) + (x + 1)] +
                    sat[static_cast<std::size_t>(y + 1) * (W + 1) + x] -
                    sat[static_cast<std::size_t>(y) * (W + 1) + x];
        T* out = w->plane(n, 0);
        for (int y = 0; y < H; ++y) {
            const int y0 = std::max(0, y - r), y1 = std::min(H - 1, y + r);
            for (int x = 0; x < W; ++x) {
                const int x0 = std::max(0, x - r), x1 = std::min(W - 1, x + r);
                const double sum = sat[static_cast<std::size_t>(y1 + 1) * (W + 1) + (x1 + 1)] -
                                   sat[static_cast<std::size_t>(y0) * (W + 1) + (x1 + 1)] -
                                   sat[static_cast<std::size_t>(y1 + 1) * (W + 1) + x0] +
                                   sat[static_cast<std::size_t>(y0) * (W + 1) + x0];
                const double count = static_cast<double>(y1 - y0 + 1) * (x1 - x0 + 1);
                const double avg = sum / count;
                const double gv = static_cast<double>(g[static_cast<long long>(y) * W + x]);
                out[static_cast<long long>(y) * W + x] =
                    static_cast<T>(1.0 + 5.0 * std::abs(avg - gv));
            }
        }
    }
    return w;
}

template <typename T>
TensorPtr<T> weighted_bce(Tape<T>& tape, const TensorPtr<T>& logits, const TensorPtr<T>& mask,
                          const TensorPtr<T>& weights) {
    require_same_shape(logits, mask, "weighted_bce");
    require_same_shape(logits, weights, "weighted_bce");
    const int N = logits->shape.n;
    const long long per_image = logits->shape.numel() / N;

    auto weight_sums = std::make_shared<std::vector<double>>(N);
    double acc = 0.0;
    for (int n = 0; n < N; ++n) {
        const T* x = logits->v.data() + n * per_image;
        const T* g = mask->v.data() + n * per_image;
        const T* w = weights->v.data() + n * per_image;
        double num = 0.0, den = 0.0;
        for (long long i = 0; i < per_image; ++i) {
            num += static_cast<double>(w[i]) * stable_bce(x[i], g[i]);
            den += static_cast<double>(w[i]);
        }
        (*weight_sums)[n] = den;
        acc += num / den;
    }
    auto out = make_tensor<T>({1, 1, 1, 1}, static_cast<T>(acc / N));
    out->leaf = false;
    check_finite(*out, "weighted_bce");

    if (tape.recording()) {
        tape.record([logits, mask, weights, weight_sums, out, N, per_image]() {
            if (out->grad.empty()) return;
            if (!(!logits->leaf || logits->requires_grad)) return;
            logits->ensure_grad();
            const double g_out = static_cast<double>(out->grad[0]);
            for (int n = 0; n < N; ++n) {
                const T* x = logits->v.data() + n * per_image;
                const T* g = mask->v.data() + n * per_image;
                const T* w = weights->v.data() + n * per_image;
                T* xg = logits->grad.data() + n * per_image;
                const double inv = 1.0 / ((*weight_sums)[n] * N);
                for (long long i = 0; i < per_image; ++i) {
                    const double d = (sigmoid_scalar(x[i]) - static_cast<double>(g[i])) *
                                     static_cast<double>(w[i]) * inv;
                    xg[i] += static_cast<T>(g_out * d);
                }
            }
        });
    }
    return out;
}

template <typename T>
TensorPtr<T> weighted_iou(Tape<T>& tape, const TensorPtr<T>& logits, const TensorPtr<T>& mask,
                          const TensorPtr<T>& weights) {
    require_same_shape(logits, mask, "weighted_iou");
    require_same_shape(logits, weights, "weighted_iou");
    const int N = logits->shape.n;
    const long long per_image = logits->shape.numel() / N;

    // inter and the complement denom = union - inter, cached for backward
    auto inter = std::make_shared<std::vector<double>>(N);
    auto denom = std::make_shared<std::vector<double>>(N);
    double acc = 0.0;
    for (int n = 0; n < N; ++n) {
        const T* x = logits->v.data() + n * per_image;
        const T* g = mask->v.data() + n * per_image;
        const T* w = weights->v.data() + n * per_image;
        double in = 0.0, un = 0.0;
        for (long long i = 0; i < per_image; ++i) {
            const double p = sigmoid_scalar(x[i]);
            const double wv = static_cast<double>(w[i]);
            const double gv = static_cast<double>(g[i]);
            in += wv * p * gv;
            un += wv * (p + gv);
        }
        (*inter)[n] = in;
        (*denom)[n] = un - in;
        acc += 1.0 - (in + 1.0) / ((*denom)[n] + 1.0);
    }
    auto out = make_tensor<T>({1, 1, 1, 1}, static_cast<T>(acc / N));
    out->leaf = false;
    check_finite(*out, "weighted_iou");

    if (tape.recording()) {
        tape.record([logits, mask, weights, inter, denom, out, N, per_image]() {
            if (out->grad.empty()) return;
            if (!(!logits->leaf || logits->requires_grad)) return;
            logits->ensure_grad();
            const double g_out = static_cast<double>(out->grad[0]);
            for (int n = 0; n < N; ++n) {
                const T* x = logits->v.data() + n * per_image;
                const T* g = mask->v.data() + n * per_image;
                const T* w = weights->v.data() + n * per_image;
                T* xg = logits->grad.data() + n * per_image;
                const double in1 = (*inter)[n] + 1.0;
                const double de1 = (*denom)[n] + 1.0;
                const double inv = 1.0 / (N * de1 * de1);
                for (long long i = 0; i < per_image; ++i) {
                    const double p = sigmoid_scalar(x[i]);
                    const double wv = static_cast<double>(w[i]);
                    const double gv = static_cast<double>(g[i]);
                    // d/d_inter of the ratio contributes de1, d/d_denom contributes -in1
                    const double dl_dp = -(wv * gv * de1 - in1 * wv * (1.0 - gv)) * inv;
                    xg[i] += static_cast<T>(g_out * dl_dp * p * (1.0 - p));
                }
            }
        });
    }
    return out;
}

template <typename T>
std::pair<TensorPtr<T>, LossBreakdown> total_loss(Tape<T>& tape, const SideOutputs<T>& outs,
                                                  const TensorPtr<T>& mask) {
    require_binary_mask(mask, "total_loss");
    auto w = pixel_weights(mask);
    const int H = mask->shape.h, W = mask->shape.w;

    LossBreakdown breakdown;
    const std::array<std::pair<const char*, TensorPtr<T>>, 4> maps = {
        std::make_pair("S_g", outs.s_g), std::make_pair("S_5", outs.s5),
        std::make_pair("S_4", outs.s4), std::make_pair("S_3", outs.s3)};

    TensorPtr<T> total;
    for (std::size_t i = 0; i < maps.size(); ++i) {
        auto up = bilinear_resize(tape, maps[i].second, H, W);
        auto bce = weighted_bce(tape, up, mask, w);
        auto iou = weighted_iou(tape, up, mask, w);
        breakdown.per_map[i] = {maps[i].first, static_cast<double>(bce->v[0]),
                                static_cast<double>(iou->v[0])};
        auto term = add(tape, bce, iou);
        total = total ? add(tape, total, term) : term;
    }
    for (const auto& row : breakdown.per_map) breakdown.total += row.bce + row.iou;
    return {total, breakdown};
}

#define PRANET_INSTANTIATE_LOSS(T)                                                               \
    template TensorPtr<T> pixel_weights<T>(const TensorPtr<T>&);                                 \
    template TensorPtr<T> weighted_bce<T>(Tape<T>&, const TensorPtr<T>&, const TensorPtr<T>&,    \
                                          const TensorPtr<T>&);                                  \
    template TensorPtr<T> weighted_iou<T>(Tape<T>&, const TensorPtr<T>&, const TensorPtr<T>&,    \
                                          const TensorPtr<T>&);                                  \
    template std::pair<TensorPtr<T>, LossBreakdown> total_loss<T>(Tape<T>&,                      \
                                                                  const SideOutputs<T>&,         \
                                                                  const TensorPtr<T>&);

PRANET_INSTANTIATE_LOSS(float)
PRANET_INSTANTIATE_LOSS(double)

#undef PRANET_INSTANTIATE_LOSS

}  // namespace pranet
