#include "iprov/pairwise.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "iprov/dct.hpp"
#include "iprov/descriptor.hpp"
#include "iprov/pixels.hpp"
#include "iprov/rng.hpp"

namespace iprov {

namespace {

// --- artifact reduction -----------------------------------------------------

// Sweep of mean |Y - requant(Y, q)|. Requantizing at any quality finer than
// the true one also produces a near-minimal error (finer steps move the
// lattice-aligned coefficients less), so a bare argmin drifts to the top of
// the sweep; the true quality shows as the coarsest near-minimal dip.
int estimate_quality(const std::vector<float>& y, int w, int h, const std::vector<int>& sweep) {
    std::vector<double> err(sweep.size());
    double min_err = std::numeric_limits<double>::max();
    for (std::size_t i = 0; i < sweep.size(); ++i) {
        const std::vector<float> r = dct::requantize_plane(y, w, h, sweep[i]);
        double acc = 0;
        for (std::size_t p = 0; p < y.size(); ++p) acc += std::abs(y[p] - r[p]);
        err[i] = acc / static_cast<double>(y.size());
        min_err = std::min(min_err, err[i]);
    }
    const double tolerance = std::max(1.25 * min_err, min_err + 0.08);
    for (std::size_t i = 0; i < sweep.size(); ++i)
        if (err[i] <= tolerance) return sweep[i];
    return sweep.back();
}

// One 3x3 cross median pass restricted to the two pixel lines straddling each
// interior 8-pixel block boundary.
std::vector<float> deblock_boundaries(const std::vector<float>& y, int w, int h) {
    std::vector<float> out(y);
    const auto on_boundary = [](int v, int limit) {
        const int m = v % 8;
        return (m == 7 && v + 1 < limit) || (m == 0 && v > 0);
    };
    float win[5];
    for (int r = 0; r < h; ++r) {
        const bool row_b = on_boundary(r, h);
        for (int c = 0; c < w; ++c) {
            if (!row_b && !on_boundary(c, w)) continue;
            win[0] = y[static_cast<std::size_t>(r) * w + c];
            win[1] = y[static_cast<std::size_t>(std::max(0, r - 1)) * w + c];
            win[2] = y[static_cast<std::size_t>(std::min(h - 1, r + 1)) * w + c];
            win[3] = y[static_cast<std::size_t>(r) * w + std::max(0, c - 1)];
            win[4] = y[static_cast<std::size_t>(r) * w + std::min(w - 1, c + 1)];
            std::nth_element(win, win + 2, win + 5);
            out[static_cast<std::size_t>(r) * w + c] = win[2];
        }
    }
    return out;
}

struct Reduced {
    int quality;
    std::vector<float> plane; // deblocked requantized luminance
};

Reduced reduce_plane(const std::vector<float>& y, int w, int h, const ModelConfig& config) {
    const int q = estimate_quality(y, w, h, config.quality_sweep);
    return {q, deblock_boundaries(dct::requantize_plane(y, w, h, q), w, h)};
}

// Mean absolute high-pass value: plane minus its 3x3 box blur.
double highfreq_l1(const std::vector<float>& p, int w, int h) {
    double acc = 0;
    for (int r = 0; r < h; ++r) {
        for (int c = 0; c < w; ++c) {
            double sum = 0;
            for (int dr = -1; dr <= 1; ++dr)
                for (int dc = -1; dc <= 1; ++dc)
                    sum += p[static_cast<std::size_t>(std::clamp(r + dr, 0, h - 1)) * w +
                             std::clamp(c + dc, 0, w - 1)];
            acc += std::abs(p[static_cast<std::size_t>(r) * w + c] - sum / 9.0);
        }
    }
    return acc / (static_cast<double>(w) * h);
}

// --- dct periodicity ---------------------------------------------------------

constexpr int kHistHalf = 100;                 // coefficient bins in [-100, 100]
constexpr int kHistBins = 2 * kHistHalf + 1;
constexpr int kBandLo = 5;                     // spectrum band: comb periods ~40 down to 2 bins

// Low-frequency AC coefficients tracked per block: (u, v) pairs.
constexpr int kCoefU[5] = {0, 1, 1, 0, 2};
constexpr int kCoefV[5] = {1, 0, 1, 2, 0};

double spectrum_peak_to_mean(const std::vector<double>& hist) {
    const int n = kHistBins;
    double mean_count = 0;
    for (double v : hist) mean_count += v;
    mean_count /= n;

    double peak = 0, sum = 0;
    int terms = 0;
    for (int k = kBandLo; k <= n / 2; ++k) {
        double re = 0, im = 0;
        for (int i = 0; i < n; ++i) {
            const double angle = -2.0 * 3.14159265358979323846 * k * i / n;
            const double v = hist[i] - mean_count;
            re += v * std::cos(angle);
            im += v * std::sin(angle);
        }
        const double mag = std::sqrt(re * re + im * im);
        peak = std::max(peak, mag);
        sum += mag;
        ++terms;
    }
    const double mean = sum / terms;
    return mean > 1e-12 ? peak / mean : 0.0;
}

double periodicity_at_offset(const std::vector<float>& y, int w, int h, int dx, int dy,
                             const float basis_row[5][8], const float basis_col[5][8]) {
    std::vector<double> hist[5];
    for (auto& hh : hist) hh.assign(kHistBins, 0.0);

    for (int by = dy; by + 8 <= h; by += 8) {
        for (int bx = dx; bx + 8 <= w; bx += 8) {
            float block[64];
            for (int r = 0; r < 8; ++r)
                for (int c = 0; c < 8; ++c)
                    block[r * 8 + c] = y[static_cast<std::size_t>(by + r) * w + bx + c] - 128.0f;
            for (int t = 0; t < 5; ++t) {
                float acc = 0;
                for (int r = 0; r < 8; ++r) {
                    float rowdot = 0;
                    for (int c = 0; c < 8; ++c) rowdot += block[r * 8 + c] * basis_row[t][c];
                    acc += rowdot * basis_col[t][r];
                }
                const int bin = static_cast<int>(std::lround(acc));
                if (bin >= -kHistHalf && bin <= kHistHalf) hist[t][bin + kHistHalf] += 1.0;
            }
        }
    }

    double score = 0;
    for (auto& hh : hist) score += spectrum_peak_to_mean(hh);
    return score / 5.0;
}

double dct_periodicity_of(const std::vector<float>& y, int w, int h) {
    // per-tracked-coefficient separable basis rows/cols
    float basis_row[5][8], basis_col[5][8];
    const double pi = 3.14159265358979323846;
    for (int t = 0; t < 5; ++t) {
        const int u = kCoefU[t], v = kCoefV[t];
        const double au = u == 0 ? std::sqrt(1.0 / 8.0) : std::sqrt(2.0 / 8.0);
        const double av = v == 0 ? std::sqrt(1.0 / 8.0) : std::sqrt(2.0 / 8.0);
        for (int x = 0; x < 8; ++x) {
            basis_row[t][x] = static_cast<float>(av * std::cos((2 * x + 1) * v * pi / 16.0));
            basis_col[t][x] = static_cast<float>(au * std::cos((2 * x + 1) * u * pi / 16.0));
        }
    }

    double best = 0;
    for (int dy = 0; dy < 8; ++dy)
        for (int dx = 0; dx < 8; ++dx)
            best = std::max(best, periodicity_at_offset(y, w, h, dx, dy, basis_row, basis_col));
    return best;
}

} // namespace

double blockiness_of(const std::vector<float>& y, int w, int h) {
    double on_v = 0, off_v = 0, on_h = 0, off_h = 0;
    std::size_t non = 0, noff = 0;
    for (int r = 0; r < h; ++r)
        for (int c = 1; c < w; ++c) {
            const double d = std::abs(y[static_cast<std::size_t>(r) * w + c] -
                                      y[static_cast<std::size_t>(r) * w + c - 1]);
            if (c % 8 == 0) {
                on_v += d;
                ++non;
            } else {
                off_v += d;
                ++noff;
            }
        }
    if (non) on_v /= non;
    if (noff) off_v /= noff;

    non = noff = 0;
    for (int r = 1; r < h; ++r)
        for (int c = 0; c < w; ++c) {
            const double d = std::abs(y[static_cast<std::size_t>(r) * w + c] -
                                      y[static_cast<std::size_t>(r - 1) * w + c]);
            if (r % 8 == 0) {
                on_h += d;
                ++non;
            } else {
                off_h += d;
                ++noff;
            }
        }
    if (non) on_h /= non;
    if (noff) off_h /= noff;

    return std::max(0.0, 0.5 * ((on_v - off_v) + (on_h - off_h)));
}

ImageRecord reduce_artifacts(const ImageRecord& img, const ModelConfig& config) {
    const std::vector<float> y = luminance(img);
    const Reduced reduced = reduce_plane(y, img.width, img.height, config);

    // Apply the luminance correction uniformly to all channels; BT.601 is
    // linear, so the output luminance tracks the reduced plane (up to clamping).
    ImageRecord out = img;
    for (std::size_t i = 0; i < y.size(); ++i) {
        const double delta = reduced.plane[i] - y[i];
        if (delta == 0) continue;
        std::uint8_t* p = out.pixels.data() + i * 3;
        for (int c = 0; c < 3; ++c) p[c] = clamp_u8(p[c] + delta);
    }
    return out;
}

Residual residual_of(const ImageRecord& img, const ModelConfig& config) {
    const std::vector<float> y = luminance(img);
    const ImageRecord reduced = reduce_artifacts(img, config);
    const std::vector<float> yr = luminance(reduced);
    Residual r;
    r.width = img.width;
    r.height = img.height;
    r.values.resize(y.size());
    for (std::size_t i = 0; i < y.size(); ++i) r.values[i] = y[i] - yr[i];
    return r;
}

CompressionProfile compression_profile(const ImageRecord& img, const ModelConfig& config) {
    if (img.width < 64 || img.height < 64)
        raise(Errc::TooSmall, "compression_profile needs at least 64x64 pixels");

    const int w = img.width, h = img.height;
    const std::vector<float> y = luminance(img);

    const Reduced reduced = reduce_plane(y, w, h, config);

    CompressionProfile profile;
    profile.blockiness = blockiness_of(y, w, h);
    profile.dct_periodicity = dct_periodicity_of(y, w, h);

    // Residual of the image against its reduced form.
    std::vector<float> rho(y.size());
    for (std::size_t i = 0; i < y.size(); ++i) rho[i] = y[i] - reduced.plane[i];

    // Reference residual: a fresh single compression, at the estimated
    // quality, of the cleaned plane, put through the same reduction chain.
    // The ratio of high-frequency residual energies is then dimensionless:
    // ~1 for a genuine single compression, larger when the image carries
    // artifact mass inconsistent with its most recent save.
    const std::vector<float> fresh = dct::requantize_plane(reduced.plane, w, h, reduced.quality);
    const std::vector<float> fresh_reduced = deblock_boundaries(fresh, w, h);
    std::vector<float> rho_ref(y.size());
    for (std::size_t i = 0; i < y.size(); ++i) rho_ref[i] = fresh[i] - fresh_reduced[i];

    const double hf = highfreq_l1(rho, w, h);
    const double hf_ref = highfreq_l1(rho_ref, w, h);
    profile.residual_hf_ratio = hf / (hf_ref + 1e-9);

    // no measurable compression evidence: report the quality as absent
    const bool evidence_free = profile.dct_periodicity < config.periodicity_noise_floor &&
                               profile.blockiness < config.blockiness_noise_floor;
    profile.estimated_quality =
        evidence_free ? std::nullopt : std::optional<int>(reduced.quality);

    profile.double_evidence =
        config.evidence_w1 * profile.dct_periodicity + config.evidence_w2 * profile.residual_hf_ratio;
    return profile;
}

// --- relationship analysis ---------------------------------------------------

namespace {

struct Match {
    float ax, ay, bx, by;
    float scale_ratio; // feature scale b / a
};

float descriptor_dist2(const float* a, const float* b) {
    float acc = 0;
    for (int i = 0; i < 32; ++i) {
        const float d = a[i] - b[i];
        acc += d * d;
    }
    return acc;
}

std::vector<Match> match_features(const LocalFeatureSet& fa, const LocalFeatureSet& fb,
                                  double ratio) {
    std::vector<Match> matches;
    if (fb.features.size() < 2) return matches;
    // nearest neighbor with ratio test; each target feature claimed at most
    // once (best distance wins) to avoid many-to-one consensus clusters
    std::vector<float> claimed(fb.features.size(), std::numeric_limits<float>::max());
    std::vector<int> claim_slot(fb.features.size(), -1);
    for (const LocalFeature& a : fa.features) {
        float best = std::numeric_limits<float>::max();
        float second = std::numeric_limits<float>::max();
        int best_i = -1;
        for (std::size_t i = 0; i < fb.features.size(); ++i) {
            const float d = descriptor_dist2(a.descriptor, fb.features[i].descriptor);
            if (d < best) {
                second = best;
                best = d;
                best_i = static_cast<int>(i);
            } else if (d < second) {
                second = d;
            }
        }
        if (best_i < 0 || best >= ratio * ratio * second) continue;
        if (best >= claimed[best_i]) continue;
        const LocalFeature& b = fb.features[best_i];
        const Match m{a.x, a.y, b.x, b.y, b.scale / a.scale};
        if (claim_slot[best_i] >= 0) {
            matches[claim_slot[best_i]] = m;
        } else {
            claim_slot[best_i] = static_cast<int>(matches.size());
            matches.push_back(m);
        }
        claimed[best_i] = best;
    }
    return matches;
}

// Randomized 4-DOF similarity fit (scale, rotation, translation) over
// normalized coordinates; returns the best inlier count.
int best_inlier_count(const std::vector<Match>& m, int iterations, double tolerance, Rng& rng) {
    if (m.size() < 2) return 0;
    const double tol2 = tolerance * tolerance;
    int best = 0;
    for (int it = 0; it < iterations; ++it) {
        const std::size_t i = static_cast<std::size_t>(rng.uniform_int(0, static_cast<std::int64_t>(m.size()) - 1));
        std::size_t j = static_cast<std::size_t>(rng.uniform_int(0, static_cast<std::int64_t>(m.size()) - 2));
        if (j >= i) ++j;

        const double ax = m[j].ax - m[i].ax, ay = m[j].ay - m[i].ay;
        const double bx = m[j].bx - m[i].bx, by = m[j].by - m[i].by;
        const double a2 = ax * ax + ay * ay;
        if (a2 < 1e-10) continue;
        // complex ratio (bx + i by) / (ax + i ay) encodes scale+rotation
        const double sr = (bx * ax + by * ay) / a2;
        const double si = (by * ax - bx * ay) / a2;
        const double scale2 = sr * sr + si * si;
        if (scale2 < 0.04 || scale2 > 25.0) continue; // implausible scale, skip sample
        const double tx = m[i].bx - (sr * m[i].ax - si * m[i].ay);
        const double ty = m[i].by - (si * m[i].ax + sr * m[i].ay);

        const double scale = std::sqrt(scale2);
        int inliers = 0;
        for (const Match& mm : m) {
            const double px = sr * mm.ax - si * mm.ay + tx;
            const double py = si * mm.ax + sr * mm.ay + ty;
            const double dx = px - mm.bx, dy = py - mm.by;
            if (dx * dx + dy * dy > tol2) continue;
            // scale coherence: the matched features' pyramid scales must agree
            // with the model scale
            if (mm.scale_ratio > 2.5 * scale || mm.scale_ratio < scale / 2.5) continue;
            ++inliers;
        }
        best = std::max(best, inliers);
    }
    return best;
}

} // namespace

PairVerdict analyze_relationship(const ImageRecord& a, const ImageRecord& b,
                                 const ModelConfig& config) {
    // canonical ordering keeps the verdict symmetric
    const bool swap = a.id.value > b.id.value;
    const ImageRecord& first = swap ? b : a;
    const ImageRecord& second = swap ? a : b;

    if (first.width < 32 || first.height < 32 || second.width < 32 || second.height < 32)
        raise(Errc::TooSmall, "analyze_relationship needs at least 32x32 pixels");

    const LocalFeatureSet fa = extract_local(first);
    const LocalFeatureSet fb = extract_local(second);
    if (fa.features.size() < 8 || fb.features.size() < 8) return {false, 0.0};

    const std::vector<Match> matches = match_features(fa, fb, config.ratio_test);
    if (matches.size() < 2) return {false, 0.0};

    Rng rng(splitmix64(config.ransac_seed ^ splitmix64(first.id.value * 0x9e3779b9ULL + second.id.value)));
    const int inliers = best_inlier_count(matches, config.ransac_iterations, config.inlier_tolerance, rng);

    const double confidence =
        std::clamp(static_cast<double>(inliers) / std::max<std::size_t>(8, matches.size()), 0.0, 1.0);
    return {confidence >= config.tau_rel, confidence};
}

DirectionVerdict determine_direction(const ImageRecord& a, const ImageRecord& b,
                                     const ModelConfig& config) {
    if (a.same_pixels(b))
        raise(Errc::IdenticalInputs, "no direction is defined for identical images");

    const double ea = compression_profile(a, config).double_evidence;
    const double eb = compression_profile(b, config).double_evidence;

    DirectionVerdict v;
    v.margin = std::abs(ea - eb);
    if (ea == eb) {
        v.direction = Direction::AtoB;
        v.degenerate_tie = true;
    } else {
        // the modified image carries dual artifacts: point toward higher evidence
        v.direction = eb > ea ? Direction::AtoB : Direction::BtoA;
    }
    return v;
}

// --- oracle models -----------------------------------------------------------

OracleModels::OracleModels(const std::vector<Journal>& journals) {
    for (const Journal& j : journals) {
        known_.insert(j.graph.nodes.begin(), j.graph.nodes.end());
        edges_.insert(j.graph.edges.begin(), j.graph.edges.end());
    }
}

void OracleModels::require_known(ImageId id) const {
    if (!known_.count(id))
        raise(Errc::UnknownImage, "id " + std::to_string(id.value) + " not covered by journals");
}

PairVerdict OracleModels::analyze(const ImageRecord& a, const ImageRecord& b) const {
    require_known(a.id);
    require_known(b.id);
    const bool related = edges_.count({a.id, b.id}) > 0 || edges_.count({b.id, a.id}) > 0;
    return {related, related ? 1.0 : 0.0};
}

DirectionVerdict OracleModels::direction(const ImageRecord& a, const ImageRecord& b) const {
    require_known(a.id);
    require_known(b.id);
    DirectionVerdict v;
    v.margin = 1.0;
    if (edges_.count({a.id, b.id})) {
        v.direction = Direction::AtoB;
    } else if (edges_.count({b.id, a.id})) {
        v.direction = Direction::BtoA;
    } else {
        raise(Errc::UnknownImage, "no ground-truth edge between " + std::to_string(a.id.value) +
                                      " and " + std::to_string(b.id.value));
    }
    return v;
}

PairwiseModels make_baseline_models(const ModelConfig& config) {
    return {std::make_shared<BaselineRelationshipModel>(config),
            std::make_shared<BaselineDirectionModel>(config)};
}

PairwiseModels make_oracle_models(const std::vector<Journal>& journals) {
    auto oracle = std::make_shared<OracleModels>(journals);
    return {oracle, oracle};
}

} // namespace iprov
