#include "pranet/model.hpp"

#include <cmath>

#include "pranet/errors.hpp"
#include "pranet/rng.hpp"

namespace pranet {

void ModelConfig::validate() const {
    if (input_size < 16 || input_size % 16 != 0)
        throw InvalidArgument("inputSize must be a positive multiple of 16, got " +
                              std::to_string(input_size));
    for (int c : level_channels)
        if (c < 1) throw InvalidArgument("levelChannels must be strictly positive");
    if (reduced_channels < 1) throw InvalidArgument("reducedChannels must be positive");
    if (refine_depth < 1) throw InvalidArgument("refineDepth must be positive");
}

// ---- ParamStore -------------------------------------------------------------

template <typename T>
TensorPtr<T> ParamStore<T>::create(const std::string& path, Shape shape) {
    if (index_.count(path)) throw InvalidArgument("duplicate parameter path " + path);
    auto t = make_tensor<T>(shape, T(0), /*requires_grad=*/true);
    index_[path] = order_.size();
    order_.emplace_back(path, t);
    return t;
}

template <typename T>
const TensorPtr<T>& ParamStore<T>::get(const std::string& path) const {
    auto it = index_.find(path);
    if (it == index_.end()) throw InvalidArgument("unknown parameter path " + path);
    return order_[it->second].second;
}

template <typename T>
bool ParamStore<T>::contains(const std::string& path) const {
    return index_.count(path) != 0;
}

template <typename T>
std::vector<TensorPtr<T>> ParamStore<T>::tensors() const {
    std::vector<TensorPtr<T>> out;
    out.reserve(order_.size());
    for (const auto& [path, t] : order_) out.push_back(t);
    return out;
}

template <typename T>
long long ParamStore<T>::value_count() const {
    long long n = 0;
    for (const auto& [path, t] : order_) n += t->shape.numel();
    return n;
}

template <typename T>
void ParamStore<T>::zero_grad() {
    for (auto& [path, t] : order_) t->grad.clear();
}

// ---- layer enumeration -------------------------------------------------------

std::vector<ConvSpec> conv_specs(const ModelConfig& cfg) {
    cfg.validate();
    std::vector<ConvSpec> specs;
    const auto& L = cfg.level_channels;
    const int cr = cfg.reduced_channels;

    int prev = 3;
    for (int k = 1; k <= 5; ++k) {
        const int c = L[k - 1];
        specs.push_back({"enc" + std::to_string(k) + ".conv1", c, prev, 3});
        specs.push_back({"enc" + std::to_string(k) + ".conv2", c, c, 3});
        prev = c;
    }

    if (cfg.enable_ppd) {
        for (int i = 3; i <= 5; ++i) {
            specs.push_back({"ppd.reduce" + std::to_string(i) + ".conv3", cr, L[i - 1], 3});
            specs.push_back({"ppd.reduce" + std::to_string(i) + ".conv1", cr, cr, 1});
        }
        specs.push_back({"ppd.fuse", cr, 3 * cr, 3});
        specs.push_back({"ppd.head", 1, cr, 1});
    } else {
        specs.push_back({"head5", 1, L[4], 1});
    }

    if (cfg.enable_ra) {
        for (int i = 5; i >= 3; --i) {
            const std::string p = "ra" + std::to_string(i) + ".conv";
            const int in0 = L[i - 1];
            const int d = cfg.refine_depth;
            if (d == 1) {
                specs.push_back({p + "1", 1, in0, 3});
            } else {
                specs.push_back({p + "1", cr, in0, 3});
                for (int j = 2; j < d; ++j) specs.push_back({p + std::to_string(j), cr, cr, 3});
                specs.push_back({p + std::to_string(d), 1, cr, 3});
            }
        }
    }
    return specs;
}

long long param_count(const ModelConfig& cfg) {
    long long n = 0;
    for (const auto& s : conv_specs(cfg)) n += s.value_count();
    return n;
}

template <typename T>
ParamStore<T> init_params(const ModelConfig& cfg, std::uint64_t seed) {
    ParamStore<T> params;
    Rng rng(seed);
    for (const auto& s : conv_specs(cfg)) {
        const double bound = 1.0 / std::sqrt(static_cast<double>(s.in_c) * s.k * s.k);
        auto w = params.create(s.path + ".w", {s.out_c, s.in_c, s.k, s.k});
        for (auto& x : w->v) x = static_cast<T>(rng.uniform(-bound, bound));
        auto b = params.create(s.path + ".b", {1, s.out_c, 1, 1});
        for (auto& x : b->v) x = static_cast<T>(rng.uniform(-bound, bound));
    }
    return params;
}

// ---- network ------------------------------------------------------------------

namespace {

template <typename T>
TensorPtr<T> conv_layer(Tape<T>& tape, const ParamStore<T>& params, const std::string& prefix,
                        const TensorPtr<T>& x, int stride, int padding) {
    return conv2d(tape, x, params.get(prefix + ".w"), params.get(prefix + ".b"), stride, padding);
}

}  // namespace

template <typename T>
FeaturePyramid<T> backbone_forward(Tape<T>& tape, const TensorPtr<T>& image,
                                   const ParamStore<T>& params, const ModelConfig& cfg) {
    cfg.validate();
    const Shape s = image->shape;
    if (s.c != 3) throw InvalidArgument("backbone expects a 3-channel image, got " + s.str());
    if (s.h != s.w || s.h < 16 || s.h % 16 != 0)
        throw InvalidArgument("backbone expects a square input with extent divisible by 16, got " +
                              s.str());

    FeaturePyramid<T> pyr;
    TensorPtr<T> x = image;
    TensorPtr<T>* levels[5] = {&pyr.f1, &pyr.f2, &pyr.f3, &pyr.f4, &pyr.f5};
    for (int k = 1; k <= 5; ++k) {
        const std::string stage = "enc" + std::to_string(k);
        x = relu(tape, conv_layer(tape, params, stage + ".conv1", x, k == 1 ? 1 : 2, 1));
        x = relu(tape, conv_layer(tape, params, stage + ".conv2", x, 1, 1));
        *levels[k - 1] = x;
    }
    return pyr;
}

template <typename T>
std::pair<TensorPtr<T>, TensorPtr<T>> partial_decoder(Tape<T>& tape, const TensorPtr<T>& f3,
                                                      const TensorPtr<T>& f4,
                                                      const TensorPtr<T>& f5,
                                                      const ParamStore<T>& params,
                                                      const ModelConfig& cfg) {
    if (f3->shape.n != f4->shape.n || f3->shape.n != f5->shape.n)
        throw InvalidArgument("partial_decoder batch extents disagree");

    auto reduce = [&](const TensorPtr<T>& f, int i) {
        const std::string p = "ppd.reduce" + std::to_string(i);
        auto r = relu(tape, conv_layer(tape, params, p + ".conv3", f, 1, 1));
        return conv_layer(tape, params, p + ".conv1", r, 1, 0);
    };
    auto r3 = reduce(f3, 3);
    auto r4 = reduce(f4, 4);
    auto r5 = reduce(f5, 5);

    auto h5 = r5;
    auto h4 = mul(tape, r4, bilinear_resize(tape, h5, r4->shape.h, r4->shape.w));
    auto h3 = mul(tape, mul(tape, r3, bilinear_resize(tape, h4, r3->shape.h, r3->shape.w)),
                  bilinear_resize(tape, h5, r3->shape.h, r3->shape.w));

    auto fused = concat_channels<T>(
        tape, {h3, bilinear_resize(tape, h4, h3->shape.h, h3->shape.w),
               bilinear_resize(tape, h5, h3->shape.h, h3->shape.w)});
    auto pd = conv_layer(tape, params, "ppd.fuse", fused, 1, 1);
    auto sg = conv_layer(tape, params, "ppd.head", pd, 1, 0);
    return {pd, sg};
}

template <typename T>
TensorPtr<T> reverse_attention_branch(Tape<T>& tape, const TensorPtr<T>& f,
                                      const TensorPtr<T>& s_next, const std::string& prefix,
                                      const ParamStore<T>& params, const ModelConfig& cfg) {
    if (s_next->shape.c != 1)
        throw InvalidArgument("reverse attention expects 1-channel coarse logits, got " +
                              s_next->shape.str());
    if (f->shape.n != s_next->shape.n)
        throw InvalidArgument("reverse attention batch extents disagree");

    auto u = bilinear_resize(tape, s_next, f->shape.h, f->shape.w);
    auto ones = make_tensor<T>({f->shape.n, 1, f->shape.h, f->shape.w}, T(1));
    auto attention = sub(tape, ones, sigmoid(tape, u));
    auto r = mul(tape, f, attention);

    TensorPtr<T> y = r;
    for (int j = 1; j < cfg.refine_depth; ++j)
        y = relu(tape, conv_layer(tape, params, prefix + ".conv" + std::to_string(j), y, 1, 1));
    y = conv_layer(tape, params, prefix + ".conv" + std::to_string(cfg.refine_depth), y, 1, 1);

    return add(tape, y, u);
}

template <typename T>
SideOutputs<T> forward(Tape<T>& tape, const TensorPtr<T>& image, const ParamStore<T>& params,
                       const ModelConfig& cfg) {
    auto pyr = backbone_forward(tape, image, params, cfg);

    SideOutputs<T> out;
    if (cfg.enable_ppd) {
        out.s_g = partial_decoder(tape, pyr.f3, pyr.f4, pyr.f5, params, cfg).second;
    } else {
        auto logits5 = conv_layer(tape, params, "head5", pyr.f5, 1, 0);
        out.s_g = bilinear_resize(tape, logits5, pyr.f3->shape.h, pyr.f3->shape.w);
    }

    if (cfg.enable_ra) {
        out.s5 = reverse_attention_branch(tape, pyr.f5, out.s_g, "ra5", params, cfg);
        out.s4 = reverse_attention_branch(tape, pyr.f4, out.s5, "ra4", params, cfg);
        out.s3 = reverse_attention_branch(tape, pyr.f3, out.s4, "ra3", params, cfg);
    } else {
        out.s5 = bilinear_resize(tape, out.s_g, pyr.f5->shape.h, pyr.f5->shape.w);
        out.s4 = bilinear_resize(tape, out.s_g, pyr.f4->shape.h, pyr.f4->shape.w);
        out.s3 = bilinear_resize(tape, out.s_g, pyr.f3->shape.h, pyr.f3->shape.w);
    }
    return out;
}

template <typename T>
TensorPtr<T> predict(Tape<T>& tape, const TensorPtr<T>& image, const ParamStore<T>& params,
                     const ModelConfig& cfg) {
    auto outs = forward(tape, image, params, cfg);
    return sigmoid(tape, bilinear_resize(tape, outs.s3, image->shape.h, image->shape.w));
}

// ---- explicit instantiations ---------------------------------------------------

#define PRANET_INSTANTIATE_MODEL(T)                                                             \
    template class ParamStore<T>;                                                               \
    template ParamStore<T> init_params<T>(const ModelConfig&, std::uint64_t);                   \
    template FeaturePyramid<T> backbone_forward<T>(Tape<T>&, const TensorPtr<T>&,               \
                                                   const ParamStore<T>&, const ModelConfig&);   \
    template std::pair<TensorPtr<T>, TensorPtr<T>> partial_decoder<T>(                          \
        Tape<T>&, const TensorPtr<T>&, const TensorPtr<T>&, const TensorPtr<T>&,                \
        const ParamStore<T>&, const ModelConfig&);                                              \
    template TensorPtr<T> reverse_attention_branch<T>(Tape<T>&, const TensorPtr<T>&,            \
                                                      const TensorPtr<T>&, const std::string&,  \
                                                      const ParamStore<T>&, const ModelConfig&);\
    template SideOutputs<T> forward<T>(Tape<T>&, const TensorPtr<T>&, const ParamStore<T>&,     \
                                       const ModelConfig&);                                     \
    template TensorPtr<T> predict<T>(Tape<T>&, const TensorPtr<T>&, const ParamStore<T>&,       \
                                     const ModelConfig&);

PRANET_INSTANTIATE_MODEL(float)
PRANET_INSTANTIATE_MODEL(double)

#undef PRANET_INSTANTIATE_MODEL

}  // namespace pranet
