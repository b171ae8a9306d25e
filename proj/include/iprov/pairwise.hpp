#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <vector>

#include "iprov/core.hpp"

namespace iprov {

/// Tunables for the two baseline pairwise models. The calibrated defaults are
/// frozen here and may be overridden from a config file (config.hpp).
struct ModelConfig {
    // relationship analysis
    double tau_rel = 0.40;
    double ratio_test = 0.8;
    int ransac_iterations = 200;
    std::uint64_t ransac_seed = 42;
    double inlier_tolerance = 0.03 * 1.4142135623730951; // 3% of the unit-square diagonal

    // direction determination (weights frozen from the 200-pair calibration runs)
    double evidence_w1 = 1.0;  // weight of dct_periodicity
    double evidence_w2 = 0.02; // weight of normalized residual high-frequency energy
    double periodicity_noise_floor = 3.5;
    double blockiness_noise_floor = 0.2;
    std::vector<int> quality_sweep = {30, 35, 40, 45, 50, 55, 60, 65, 70, 75, 80, 85, 90, 95};
};

struct PairVerdict {
    bool related = false;
    double confidence = 0.0; // in [0, 1]; related <=> confidence >= tau_rel
};

enum class Direction { AtoB, BtoA };

struct DirectionVerdict {
    Direction direction = Direction::AtoB;
    double margin = 0.0;
    bool degenerate_tie = false;
};

/// Signed luminance residual I - R(I).
struct Residual {
    int width = 0;
    int height = 0;
    std::vector<float> values;
};

/// Measurable double-compression evidence for one image.
struct CompressionProfile {
    std::optional<int> estimated_quality; // absent when no compression evidence
    double blockiness = 0.0;
    double dct_periodicity = 0.0;
    double residual_hf_ratio = 0.0; // normalized residual high-frequency energy
    double double_evidence = 0.0;   // w1 * dct_periodicity + w2 * residual_hf_ratio
};

/// Baseline artifact reduction: requantize luminance at the estimated
/// quality, then one 3x3 cross median pass across 8-pixel block boundaries.
/// Dimensions unchanged. Idempotent within tolerance; never increases
/// blockiness.
ImageRecord reduce_artifacts(const ImageRecord& img, const ModelConfig& config = {});

Residual residual_of(const ImageRecord& img, const ModelConfig& config = {});

/// Grid-step blockiness of a luminance plane: mean absolute step across
/// 8-pixel grid lines minus the off-grid baseline, clamped at zero.
double blockiness_of(const std::vector<float>& y, int w, int h);

/// Requires width, height >= 64; throws TooSmall.
CompressionProfile compression_profile(const ImageRecord& img, const ModelConfig& config = {});

/// Local-feature matching + randomized 4-DOF similarity fit. Symmetric in its
/// arguments; deterministic given config.ransac_seed.
PairVerdict analyze_relationship(const ImageRecord& a, const ImageRecord& b,
                                 const ModelConfig& config = {});

/// Direction points toward the image with larger double_evidence; margin is
/// the absolute evidence gap. Byte-identical inputs throw IdenticalInputs.
DirectionVerdict determine_direction(const ImageRecord& a, const ImageRecord& b,
                                     const ModelConfig& config = {});

// ---------------------------------------------------------------------------
// Pluggable model interfaces. Pipeline code depends only on these signatures;
// baseline and oracle implementations are interchangeable.

class RelationshipModel {
public:
    virtual ~RelationshipModel() = default;
    virtual PairVerdict analyze(const ImageRecord& a, const ImageRecord& b) const = 0;
};

class DirectionModel {
public:
    virtual ~DirectionModel() = default;
    virtual DirectionVerdict direction(const ImageRecord& a, const ImageRecord& b) const = 0;
};

class BaselineRelationshipModel final : public RelationshipModel {
public:
    explicit BaselineRelationshipModel(ModelConfig config = {}) : config_(std::move(config)) {}
    PairVerdict analyze(const ImageRecord& a, const ImageRecord& b) const override {
        return analyze_relationship(a, b, config_);
    }

private:
    ModelConfig config_;
};

class BaselineDirectionModel final : public DirectionModel {
public:
    explicit BaselineDirectionModel(ModelConfig config = {}) : config_(std::move(config)) {}
    DirectionVerdict direction(const ImageRecord& a, const ImageRecord& b) const override {
        return determine_direction(a, b, config_);
    }

private:
    ModelConfig config_;
};

/// Ground-truth models backed by journal edges; test and oracle-mode
/// instrumentation. Ids outside the journals throw UnknownImage.
class OracleModels final : public RelationshipModel, public DirectionModel {
public:
    explicit OracleModels(const std::vector<Journal>& journals);

    PairVerdict analyze(const ImageRecord& a, const ImageRecord& b) const override;
    DirectionVerdict direction(const ImageRecord& a, const ImageRecord& b) const override;

private:
    void require_known(ImageId id) const;
    std::set<ImageId> known_;
    std::set<MREdge> edges_;
};

struct PairwiseModels {
    std::shared_ptr<const RelationshipModel> relationship;
    std::shared_ptr<const DirectionModel> direction;
};

PairwiseModels make_baseline_models(const ModelConfig& config = {});
PairwiseModels make_oracle_models(const std::vector<Journal>& journals);

} // namespace iprov
