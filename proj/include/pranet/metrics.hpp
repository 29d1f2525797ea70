#pragma once

#include <map>
#include <string>
#include <utility>
#include <vector>

#include "pranet/tensor.hpp"

namespace pranet {
namespace metrics {

// All per-image metrics take P, a real-valued map in [0,1], and G, a {0,1}
// mask, both shaped [1,1,h,w]. Math runs in double.

// Binarizes P at 0.5. Both-empty masks score 1.
std::pair<double, double> dice_iou(const TensorF& pred, const TensorF& mask);

double mae(const TensorF& pred, const TensorF& mask);

// Boundary-aware weighted F-measure (beta^2 = 1). Errors on background pixels
// are copied from their nearest foreground pixel (exact Euclidean nearest,
// ties broken by smallest row then column), smoothed with a zero-padded 7x7
// Gaussian (sigma 5), and discounted by B = 2 - exp(ln(0.5)/5 * dist) away
// from the object. Throws UndefinedMetric when G has no foreground.
double weighted_fbeta(const TensorF& pred, const TensorF& mask);

// S = 0.5 * object term + 0.5 * region term. The region term splits both maps
// into four blocks at G's foreground centroid (1-based rounded, as in the
// reference toolbox) and scores an SSIM-like Q per block. Degenerate masks:
// all-background gives 1 - mean(P), all-foreground gives mean(P).
double s_measure(const TensorF& pred, const TensorF& mask);

// max over the 256 thresholds t = k/255 of the enhanced-alignment score of
// (P >= t) against G; degenerate G scores 1 - mean(B) (all-background) or
// mean(B) (all-foreground).
double e_measure_max(const TensorF& pred, const TensorF& mask);

struct MetricReport {
    struct Row {
        std::string image_id;
        double dice = 0.0, iou = 0.0, wfbeta = 0.0, salpha = 0.0, emax = 0.0, mae = 0.0;
        bool wfbeta_defined = true;
    };
    double mean_dice = 0.0, mean_iou = 0.0, wfbeta = 0.0, salpha = 0.0, emax = 0.0, mae = 0.0;
    std::vector<Row> per_image;  // ordered by image id
    int count = 0;

    // fixed field order, floats at 6 decimals; byte-stable for identical inputs
    std::string to_json() const;
};

// Scores every id (the two maps must have identical, non-empty id sets);
// predictions whose extent differs from the mask are bilinearly resized first.
// Images where a metric is undefined are excluded from that metric's mean and
// flagged on their row.
MetricReport evaluate_dataset(const std::map<std::string, TensorPtrF>& predictions,
                              const std::map<std::string, TensorPtrF>& ground_truths);

}  // namespace metrics
}  // namespace pranet
