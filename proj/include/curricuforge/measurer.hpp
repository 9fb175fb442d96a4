#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "curricuforge/dataset.hpp"
#include "curricuforge/geometry.hpp"

namespace curricuforge {

enum class Optimizer { sgd, momentum };

struct TrainConfig {
    double learning_rate = 0.05;
    int epochs = 30;
    int batch_size = 64;
    double lambda = 1.0;         // GIoU term coefficient in the loss
    std::uint64_t seed = 0;
    Optimizer optimizer = Optimizer::momentum;
    double momentum = 0.9;
    bool cosine_decay = true;

    bool operator==(const TrainConfig&) const = default;
};

// Linear map feature -> box parameters, decoded to a box by the logistic
// squash. The smallest model class that can realize the synthetic world.
struct ToyGroundingModel {
    int feature_dim = 0;
    std::vector<double> weight; // 4 x feature_dim, row-major
    std::array<double, 4> bias{};
    TrainConfig config;
    double final_loss = 0.0;
    std::vector<double> epoch_losses;
};

// Either a trained model or an imported table of externally computed
// reliabilities. Cheap to copy; the payload is shared and immutable.
struct MeasurerHandle {
    std::shared_ptr<const ToyGroundingModel> model;
    std::shared_ptr<const std::map<std::string, double>> scores;

    bool is_trained() const { return model != nullptr; }

    static MeasurerHandle trained(ToyGroundingModel m);
    static MeasurerHandle external(std::map<std::string, double> table);
};

using SampleRefs = std::vector<const PseudoSample*>;

/// Minibatch gradient descent on the mean grounding loss, seeded shuffling,
/// zero-initialized weights. Deterministic given (samples, cfg). Throws
/// TrainingError when the loss or the weights stop being finite.
ToyGroundingModel train_model(const SampleRefs& samples, int feature_dim, const TrainConfig& cfg);

MeasurerHandle train_measurer(const SourceSet& source, int feature_dim, const TrainConfig& cfg);

Box predict(const ToyGroundingModel& m, const std::vector<double>& feature);
Box predict(const MeasurerHandle& m, const std::vector<double>& feature);

/// Fraction of samples whose predicted box overlaps the label at or above
/// iou_threshold.
double evaluate_top1(const MeasurerHandle& m, const std::vector<PseudoSample>& labeled,
                     double iou_threshold);

/// Reads line-delimited {"sample_id", "reliability"} records into an External
/// handle. Values outside [0,1] and duplicate ids are ingestion errors.
MeasurerHandle import_external_scores(const std::string& path);

/// Looks up an External handle's table. Missing ids raise CoverageError.
double external_score(const MeasurerHandle& m, const std::string& sample_id);

/// Text checkpoint: one JSON header line {feature_dim, final_loss,
/// train_config}, then four weight rows and one bias row of space-separated
/// shortest-round-trip decimals. Loading reproduces the saved model exactly.
void save_checkpoint(const ToyGroundingModel& m, const std::string& path);
ToyGroundingModel load_checkpoint(const std::string& path);

} // namespace curricuforge
