#pragma once

#include <array>
#include <string>
#include <utility>

#include "pranet/model.hpp"
#include "pranet/tensor.hpp"

namespace pranet {

struct LossBreakdown {
    struct Row {
        std::string name;
        double bce = 0.0;
        double iou = 0.0;
    };
    std::array<Row, 4> per_map;  // S_g, S_5, S_4, S_3
    double total = 0.0;
};

// w = 1 + 5 * |boxavg31(G) - G|, where boxavg31 averages the in-bounds part of
// the centered 31x31 window. Values lie in [1, 6]; constant masks give w == 1.
// G must be exactly {0,1}-valued.
template <typename T>
TensorPtr<T> pixel_weights(const TensorPtr<T>& mask);

// Per image: sum(w * bce(logit, G)) / sum(w), then batch mean. BCE is evaluated
// from logits in the stable form max(x,0) - x*G + log(1 + exp(-|x|)).
template <typename T>
TensorPtr<T> weighted_bce(Tape<T>& tape, const TensorPtr<T>& logits, const TensorPtr<T>& mask,
                          const TensorPtr<T>& weights);

// Per image with p = sigmoid(logits): inter = sum(w*p*G), union = sum(w*(p+G)),
// loss = 1 - (inter+1)/(union-inter+1), then batch mean. Lies in [0, 1).
template <typename T>
TensorPtr<T> weighted_iou(Tape<T>& tape, const TensorPtr<T>& logits, const TensorPtr<T>& mask,
                          const TensorPtr<T>& weights);

// Deep supervision: each side output is resized to the mask's extent and scored
// with weighted_bce + weighted_iou under a shared weight map; total is the sum
// over S_g, S_5, S_4, S_3.
template <typename T>
std::pair<TensorPtr<T>, LossBreakdown> total_loss(Tape<T>& tape, const SideOutputs<T>& outs,
                                                  const TensorPtr<T>& mask);

}  // namespace pranet
