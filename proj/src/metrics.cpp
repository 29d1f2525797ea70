#include "pranet/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "pranet/errors.hpp"

namespace pranet {
namespace metrics {

namespace {

constexpr double kEps = 1e-8;

void require_pair(const TensorF& pred, const TensorF& mask, const char* op) {
    if (pred.shape.n != 1 || pred.shape.c != 1 || mask.shape.n != 1 || mask.shape.c != 1)
        throw InvalidArgument(std::string(op) + ": maps must be [1,1,h,w]");
    if (pred.shape.h != mask.shape.h || pred.shape.w != mask.shape.w)
        throw InvalidArgument(std::string(op) + ": extent mismatch " + pred.shape.str() + " vs " +
                              mask.shape.str());
    for (float g : mask.v)
        if (g != 0.0f && g != 1.0f)
            throw InvalidArgument(std::string(op) + ": mask is not {0,1}-valued");
}

}  // namespace

std::pair<double, double> dice_iou(const TensorF& pred, const TensorF& mask) {
    require_pair(pred, mask, "dice_iou");
    long long nb = 0, ng = 0, ninter = 0;
    for (std::size_t i = 0; i < pred.v.size(); ++i) {
        const bool b = pred.v[i] >= 0.5f;
        const bool g = mask.v[i] != 0.0f;
        nb += b;
        ng += g;
        ninter += b && g;
    }
    if (nb == 0 && ng == 0) return {1.0, 1.0};
    const double dice = 2.0 * ninter / static_cast<double>(nb + ng);
    const double iou = static_cast<double>(ninter) / static_cast<double>(nb + ng - ninter);
    return {dice, iou};
}

double mae(const TensorF& pred, const TensorF& mask) {
    require_pair(pred, mask, "mae");
    double acc = 0.0;
    for (std::size_t i = 0; i < pred.v.size(); ++i)
        acc += std::abs(static_cast<double>(pred.v[i]) - static_cast<double>(mask.v[i]));
    return acc / static_cast<double>(pred.v.size());
}

// ---- weighted F-measure ------------------------------------------------------

namespace {

struct Nearest {
    long long dist2 = -1;
    int row = 0, col = 0;
};

// Exact nearest foreground pixel for every position, minimizing
// (squared distance, row, col) lexicographically so ties are canonical.
std::vector<Nearest> nearest_foreground(const TensorF& mask) {
    const int H = mask.shape.h, W = mask.shape.w;
    std::vector<std::vector<int>> fg_cols(H);
    for (int y = 0; y < H; ++y)
        for (int x = 0; x < W; ++x)
            if (mask.v[static_cast<std::size_t>(y) * W + x] != 0.0f) fg_cols[y].push_back(x);

    std::vector<Nearest> out(static_cast<std::size_t>(H) * W);
    auto consider = [](Nearest& best, long long d2, int r, int c) {
        if (best.dist2 < 0 || d2 < best.dist2 ||
            (d2 == best.dist2 && (r < best.row || (r == best.row && c < best.col)))) {
            best = {d2, r, c};
        }
    };

    for (int y = 0; y < H; ++y) {
        for (int x = 0; x < W; ++x) {
            Nearest& best = out[static_cast<std::size_t>(y) * W + x];
            if (mask.v[static_cast<std::size_t>(y) * W + x] != 0.0f) {
                best = {0, y, x};
                continue;
            }
            // expand row bands outward; a band at row distance dr can only
            // improve on the current best while dr^2 <= best.dist2
            for (int dr = 0; dr < H; ++dr) {
                const long long dr2 = static_cast<long long>(dr) * dr;
                if (best.dist2 >= 0 && dr2 > best.dist2) break;
                const int rows[2] = {y - dr, y + dr};
                const int nrows = dr == 0 ? 1 : 2;
                for (int k = 0; k < nrows; ++k) {
                    const int r = rows[k];
                    if (r < 0 || r >= H) continue;
                    const auto& cols = fg_cols[r];
                    if (cols.empty()) continue;
                    auto it = std::lower_bound(cols.begin(), cols.end(), x);
                    int li = static_cast<int>(it - cols.begin()) - 1;
                    int ri = static_cast<int>(it - cols.begin());
                    while (li >= 0 || ri < static_cast<int>(cols.size())) {
                        const long long ld2 =
                            li >= 0 ? dr2 + static_cast<long long>(x - cols[li]) * (x - cols[li])
                                    : -1;
                        const long long rd2 =
                            ri < static_cast<int>(cols.size())
                                ? dr2 + static_cast<long long>(cols[ri] - x) * (cols[ri] - x)
                                : -1;
                        const bool l_useful = ld2 >= 0 && (best.dist2 < 0 || ld2 <= best.dist2);
                        const bool r_useful = rd2 >= 0 && (best.dist2 < 0 || rd2 <= best.dist2);
                        if (!l_useful && !r_useful) break;
                        if (l_useful && (!r_useful || ld2 <= rd2)) {
                            consider(best, ld2, r, cols[li--]);
                        } else {
                            consider(best, rd2, r, cols[ri++]);
                        }
                    }
                }
            }
        }
    }
    return out;
}

}  // namespace

double weighted_fbeta(const TensorF& pred, const TensorF& mask) {
    require_pair(pred, mask, "weighted_fbeta");
    const int H = mask.shape.h, W = mask.shape.w;
    const std::size_t total = static_cast<std::size_t>(H) * W;

    long long fg_count = 0;
    for (float g : mask.v) fg_count += g != 0.0f;
    if (fg_count == 0) throw UndefinedMetric("weighted_fbeta: mask has no foreground");

    std::vector<double> err(total);
    for (std::size_t i = 0; i < total; ++i)
        err[i] = std::abs(static_cast<double>(pred.v[i]) - static_cast<double>(mask.v[i]));

    // background errors take the value at their nearest foreground pixel
    const std::vector<Nearest> nf = nearest_foreground(mask);
    std::vector<double> err_t(total);
    for (std::size_t i = 0; i < total; ++i) {
        if (mask.v[i] != 0.0f) {
            err_t[i] = err[i];
        } else {
            err_t[i] = err[static_cast<std::size_t>(nf[i].row) * W + nf[i].col];
        }
    }

    // separable 7x7 Gaussian, sigma 5, renormalized over the in-bounds taps so
    // a constant field blurs to itself everywhere (the in-bounds region is a
    // rectangle, so per-axis renormalization equals the 2-D one exactly)
    double k1[7];
    for (int i = 0; i < 7; ++i)
        k1[i] = std::exp(-static_cast<double>((i - 3) * (i - 3)) / 50.0);
    std::vector<double> tmp(total, 0.0), blur(total, 0.0);
    for (int y = 0; y < H; ++y)
        for (int x = 0; x < W; ++x) {
            double acc = 0.0, wsum = 0.0;
            for (int t = -3; t <= 3; ++t) {
                const int xx = x + t;
                if (xx < 0 || xx >= W) continue;
                acc += k1[t + 3] * err_t[static_cast<std::size_t>(y) * W + xx];
                wsum += k1[t + 3];
            }
            tmp[static_cast<std::size_t>(y) * W + x] = acc / wsum;
        }
    for (int y = 0; y < H; ++y)
        for (int x = 0; x < W; ++x) {
            double acc = 0.0, wsum = 0.0;
            for (int t = -3; t <= 3; ++t) {
                const int yy = y + t;
                if (yy < 0 || yy >= H) continue;
                acc += k1[t + 3] * tmp[static_cast<std::size_t>(yy) * W + x];
                wsum += k1[t + 3];
            }
            blur[static_cast<std::size_t>(y) * W + x] = acc / wsum;
        }

    double ew_fg_sum = 0.0, ew_bg_sum = 0.0;
    for (std::size_t i = 0; i < total; ++i) {
        double e;
        double b;
        if (mask.v[i] != 0.0f) {
            e = std::min(err[i], blur[i]);
            b = 1.0;
        } else {
            e = err[i];
            const double dist = std::sqrt(static_cast<double>(nf[i].dist2));
            b = 2.0 - std::exp(std::log(0.5) / 5.0 * dist);
        }
        const double ew = e * b;
        if (mask.v[i] != 0.0f)
            ew_fg_sum += ew;
        else
            ew_bg_sum += ew;
    }

    const double tpw = static_cast<double>(fg_count) - ew_fg_sum;
    const double fpw = ew_bg_sum;
    const double recall = 1.0 - ew_fg_sum / static_cast<double>(fg_count);
    const double precision = (tpw + fpw) == 0.0 ? 0.0 : tpw / (tpw + fpw);
    if (precision + recall == 0.0) return 0.0;
    return 2.0 * precision * recall / (precision + recall);
}

// ---- S-measure -----------------------------------------------------------------

namespace {

// O(x) = 2*mean / (mean^2 + 1 + std + eps) over the values selected by keep
double object_score(const TensorF& pred, const TensorF& mask, bool fg, bool complement) {
    double sum = 0.0;
    long long n = 0;
    for (std::size_t i = 0; i < pred.v.size(); ++i) {
        if ((mask.v[i] != 0.0f) != fg) continue;
        const double v = complement ? 1.0 - pred.v[i] : pred.v[i];
        sum += v;
        ++n;
    }
    if (n == 0) return 0.0;
    const double mean = sum / n;
    double var = 0.0;
    for (std::size_t i = 0; i < pred.v.size(); ++i) {
        if ((mask.v[i] != 0.0f) != fg) continue;
        const double v = (complement ? 1.0 - pred.v[i] : pred.v[i]) - mean;
        var += v * v;
    }
    const double sd = n > 1 ? std::sqrt(var / (n - 1)) : 0.0;
    return 2.0 * mean / (mean * mean + 1.0 + sd + kEps);
}

// SSIM-like block score with (N-1+eps)-normalized moments
double block_q(const float* p, const float* g, int H, int W, int y0, int y1, int x0, int x1) {
    const long long n = static_cast<long long>(y1 - y0) * (x1 - x0);
    if (n == 0) return 0.0;
    double xm = 0.0, ym = 0.0;
    for (int y = y0; y < y1; ++y)
        for (int x = x0; x < x1; ++x) {
            xm += p[static_cast<std::size_t>(y) * W + x];
            ym += g[static_cast<std::size_t>(y) * W + x];
        }
    xm /= n;
    ym /= n;
    double sx = 0.0, sy = 0.0, sxy = 0.0;
    for (int y = y0; y < y1; ++y)
        for (int x = x0; x < x1; ++x) {
            const double dx = p[static_cast<std::size_t>(y) * W + x] - xm;
            const double dy = g[static_cast<std::size_t>(y) * W + x] - ym;
            sx += dx * dx;
            sy += dy * dy;
            sxy += dx * dy;
        }
    const double norm = static_cast<double>(n) - 1.0 + kEps;
    sx /= norm;
    sy /= norm;
    sxy /= norm;
    const double a = 4.0 * xm * ym * sxy;
    const double b = (xm * xm + ym * ym) * (sx + sy);
    if (a != 0.0) return a / (b + kEps);
    return b == 0.0 ? 1.0 : 0.0;
}

}  // namespace

double s_measure(const TensorF& pred, const TensorF& mask) {
    require_pair(pred, mask, "s_measure");
    const int H = mask.shape.h, W = mask.shape.w;
    const double total = static_cast<double>(H) * W;

    double fg = 0.0, psum = 0.0;
    for (std::size_t i = 0; i < mask.v.size(); ++i) {
        fg += mask.v[i];
        psum += pred.v[i];
    }
    const double mu = fg / total;
    const double pmean = psum / total;
    if (fg == 0.0) return std::clamp(1.0 - pmean, 0.0, 1.0);
    if (fg == total) return std::clamp(pmean, 0.0, 1.0);

    const double s_object = mu * object_score(pred, mask, true, false) +
                            (1.0 - mu) * object_score(pred, mask, false, true);

    // foreground centroid, computed 1-based and rounded like the reference code
    double rw = 0.0, cw = 0.0;
    for (int y = 0; y < H; ++y)
        for (int x = 0; x < W; ++x)
            if (mask.v[static_cast<std::size_t>(y) * W + x] != 0.0f) {
                rw += y + 1;
                cw += x + 1;
            }
    const int cy = static_cast<int>(std::lround(rw / fg));
    const int cx = static_cast<int>(std::lround(cw / fg));

    const float* p = pred.v.data();
    const float* g = mask.v.data();
    const double w_lt = static_cast<double>(cx) * cy / total;
    const double w_rt = static_cast<double>(W - cx) * cy / total;
    const double w_lb = static_cast<double>(cx) * (H - cy) / total;
    const double w_rb = 1.0 - w_lt - w_rt - w_lb;
    const double s_region = w_lt * block_q(p, g, H, W, 0, cy, 0, cx) +
                            w_rt * block_q(p, g, H, W, 0, cy, cx, W) +
                            w_lb * block_q(p, g, H, W, cy, H, 0, cx) +
                            w_rb * block_q(p, g, H, W, cy, H, cx, W);

    return std::clamp(0.5 * s_object + 0.5 * s_region, 0.0, 1.0);
}

// ---- E-measure -----------------------------------------------------------------

double e_measure_max(const TensorF& pred, const TensorF& mask) {
    require_pair(pred, mask, "e_measure_max");
    const std::size_t total = pred.v.size();

    long long fg = 0;
    for (float g : mask.v) fg += g != 0.0f;
    const double gmean = static_cast<double>(fg) / total;
    const bool all_bg = fg == 0;
    const bool all_fg = static_cast<std::size_t>(fg) == total;

    double best = 0.0;
    for (int k = 0; k <= 255; ++k) {
        const float t = static_cast<float>(k) / 255.0f;
        long long nb = 0;
        for (std::size_t i = 0; i < total; ++i) nb += pred.v[i] >= t;
        double score;
        if (all_bg) {
            score = 1.0 - static_cast<double>(nb) / total;
        } else if (all_fg) {
            score = static_cast<double>(nb) / total;
        } else {
            const double bmean = static_cast<double>(nb) / total;
            double acc = 0.0;
            for (std::size_t i = 0; i < total; ++i) {
                const double pg = (mask.v[i] != 0.0f ? 1.0 : 0.0) - gmean;
                const double pb = (pred.v[i] >= t ? 1.0 : 0.0) - bmean;
                const double xi = 2.0 * pg * pb / (pg * pg + pb * pb + kEps);
                acc += (xi + 1.0) * (xi + 1.0) / 4.0;
            }
            score = acc / total;
        }
        best = std::max(best, score);
    }
    return best;
}

// ---- dataset aggregation ---------------------------------------------------------

namespace {

std::string fmt6(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.6f", v);
    return buf;
}

std::string json_escape(const std::string& s) {
    std::string out;
    for (char ch : s) {
        switch (ch) {
            case '"': out += "\\\""; break;
            case '\\': out += "\\\\"; break;
            case '\n': out += "\\n"; break;
            case '\r': out += "\\r"; break;
            case '\t': out += "\\t"; break;
            default:
                if (static_cast<unsigned char>(ch) < 0x20) {
                    char buf[8];
                    std::snprintf(buf, sizeof(buf), "\\u%04x", ch);
                    out += buf;
                } else {
                    out += ch;
                }
        }
    }
    return out;
}

}  // namespace

std::string MetricReport::to_json() const {
    std::ostringstream os;
    os << "{\n";
    os << "  \"meanDice\": " << fmt6(mean_dice) << ",\n";
    os << "  \"meanIoU\": " << fmt6(mean_iou) << ",\n";
    os << "  \"wFbeta\": " << fmt6(wfbeta) << ",\n";
    os << "  \"sAlpha\": " << fmt6(salpha) << ",\n";
    os << "  \"eMax\": " << fmt6(emax) << ",\n";
    os << "  \"mae\": " << fmt6(mae) << ",\n";
    os << "  \"count\": " << count << ",\n";
    os << "  \"perImage\": [\n";
    for (std::size_t i = 0; i < per_image.size(); ++i) {
        const Row& r = per_image[i];
        os << "    {\"imageId\": \"" << json_escape(r.image_id) << "\", \"dice\": "
           << fmt6(r.dice) << ", \"iou\": " << fmt6(r.iou) << ", \"wFbeta\": "
           << (r.wfbeta_defined ? fmt6(r.wfbeta) : std::string("null"))
           << ", \"sAlpha\": " << fmt6(r.salpha) << ", \"eMax\": " << fmt6(r.emax)
           << ", \"mae\": " << fmt6(r.mae) << ", \"flags\": ["
           << (r.wfbeta_defined ? "" : "\"wFbeta-undefined\"") << "]}"
           << (i + 1 < per_image.size() ? "," : "") << "\n";
    }
    os << "  ]\n}\n";
    return os.str();
}

MetricReport evaluate_dataset(const std::map<std::string, TensorPtrF>& predictions,
                              const std::map<std::string, TensorPtrF>& ground_truths) {
    if (predictions.empty() || ground_truths.empty())
        throw InvalidArgument("evaluate_dataset: empty input");
    if (predictions.size() != ground_truths.size())
        throw InvalidArgument("evaluate_dataset: id sets differ in size");
    for (const auto& [id, g] : ground_truths)
        if (!predictions.count(id))
            throw InvalidArgument("evaluate_dataset: missing prediction for " + id);

    MetricReport report;
    double dice_sum = 0, iou_sum = 0, wf_sum = 0, s_sum = 0, e_sum = 0, mae_sum = 0;
    long long wf_count = 0;

    TapeF tape;
    tape.set_recording(false);
    for (const auto& [id, gt] : ground_truths) {
        TensorPtrF p = predictions.at(id);
        if (p->shape.h != gt->shape.h || p->shape.w != gt->shape.w)
            p = bilinear_resize(tape, p, gt->shape.h, gt->shape.w);

        MetricReport::Row row;
        row.image_id = id;
        std::tie(row.dice, row.iou) = dice_iou(*p, *gt);
        row.mae = mae(*p, *gt);
        row.salpha = s_measure(*p, *gt);
        row.emax = e_measure_max(*p, *gt);
        try {
            row.wfbeta = weighted_fbeta(*p, *gt);
        } catch (const UndefinedMetric&) {
            row.wfbeta_defined = false;
            row.wfbeta = 0.0;
        }

        dice_sum += row.dice;
        iou_sum += row.iou;
        s_sum += row.salpha;
        e_sum += row.emax;
        mae_sum += row.mae;
        if (row.wfbeta_defined) {
            wf_sum += row.wfbeta;
            ++wf_count;
        }
        report.per_image.push_back(std::move(row));
    }

    report.count = static_cast<int>(report.per_image.size());
    report.mean_dice = dice_sum / report.count;
    report.mean_iou = iou_sum / report.count;
    report.salpha = s_sum / report.count;
    report.emax = e_sum / report.count;
    report.mae = mae_sum / report.count;
    report.wfbeta = wf_count > 0 ? wf_sum / wf_count : 0.0;
    return report;
}

}  // namespace metrics
}  // namespace pranet
