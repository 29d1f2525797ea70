#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "pranet/tensor.hpp"

namespace pranet {

// Architecture + ablation switches. Defaults are the full-size recipe; the
// harness swaps in its desk-scale input size.
struct ModelConfig {
    int input_size = 352;  // square side, divisible by 16
    std::array<int, 5> level_channels = {8, 16, 24, 32, 40};
    int reduced_channels = 16;
    int refine_depth = 3;  // conv layers inside each reverse-attention branch
    bool enable_ppd = true;
    bool enable_ra = true;

    void validate() const;
};

template <typename T>
struct FeaturePyramid {
    TensorPtr<T> f1, f2, f3, f4, f5;  // strides 1, 2, 4, 8, 16
};

template <typename T>
struct SideOutputs {
    TensorPtr<T> s_g;  // global map, stride 4
    TensorPtr<T> s5;   // stride 16
    TensorPtr<T> s4;   // stride 8
    TensorPtr<T> s3;   // stride 4
};

// All learnable tensors, addressable by a stable string path. Iteration and
// checkpoint order is creation order, which is a fixed function of the config.
template <typename T>
class ParamStore {
public:
    TensorPtr<T> create(const std::string& path, Shape shape);
    const TensorPtr<T>& get(const std::string& path) const;
    bool contains(const std::string& path) const;

    const std::vector<std::pair<std::string, TensorPtr<T>>>& entries() const { return order_; }
    std::vector<TensorPtr<T>> tensors() const;
    long long value_count() const;
    void zero_grad();

private:
    std::vector<std::pair<std::string, TensorPtr<T>>> order_;
    std::map<std::string, std::size_t> index_;
};

// One conv layer of the architecture: path prefix plus its shape.
struct ConvSpec {
    std::string path;
    int out_c, in_c, k;
    long long value_count() const {
        return static_cast<long long>(out_c) * in_c * k * k + out_c;
    }
};

// Layer list in creation/checkpoint order; a pure function of the config.
std::vector<ConvSpec> conv_specs(const ModelConfig& cfg);
long long param_count(const ModelConfig& cfg);

// Fan-in uniform init in [-1/sqrt(fanIn), +1/sqrt(fanIn)], weights then bias,
// layers in conv_specs order.
template <typename T>
ParamStore<T> init_params(const ModelConfig& cfg, std::uint64_t seed);

// Five stages; each is conv3x3 -> relu -> conv3x3 -> relu, with a stride-2
// first conv from stage 2 on, so level k sits at stride 2^(k-1).
template <typename T>
FeaturePyramid<T> backbone_forward(Tape<T>& tape, const TensorPtr<T>& image,
                                   const ParamStore<T>& params, const ModelConfig& cfg);

// Aggregates f3..f5: each level is reduced to C_r channels, the coarser maps
// gate the finer ones multiplicatively, and the concatenation is fused into
// the decoder feature PD with the one-channel global map S_g on top.
template <typename T>
std::pair<TensorPtr<T>, TensorPtr<T>> partial_decoder(Tape<T>& tape, const TensorPtr<T>& f3,
                                                      const TensorPtr<T>& f4,
                                                      const TensorPtr<T>& f5,
                                                      const ParamStore<T>& params,
                                                      const ModelConfig& cfg);

// u = resize(s_next to f's extent); A = 1 - sigmoid(u); R = f (*) A broadcast
// across channels; s = refine(R) + u.
template <typename T>
TensorPtr<T> reverse_attention_branch(Tape<T>& tape, const TensorPtr<T>& f,
                                      const TensorPtr<T>& s_next, const std::string& prefix,
                                      const ParamStore<T>& params, const ModelConfig& cfg);

template <typename T>
SideOutputs<T> forward(Tape<T>& tape, const TensorPtr<T>& image, const ParamStore<T>& params,
                       const ModelConfig& cfg);

// sigmoid(resize(S_3, h, w)) at the input's extent; values in (0, 1)
template <typename T>
TensorPtr<T> predict(Tape<T>& tape, const TensorPtr<T>& image, const ParamStore<T>& params,
                     const ModelConfig& cfg);

}  // namespace pranet
