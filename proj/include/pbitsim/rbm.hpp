#pragma once

// Single-layer classification RBM: CD-1 training on image+label visible
// vectors, differential-pair conductance mapping, and p-bit inference that
// records per-label firing frequencies through a PIR.

#include "pbitsim/device_model.hpp"
#include "pbitsim/pir.hpp"
#include "pbitsim/rng.hpp"

#include <Eigen/Dense>

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace pbitsim::rbm {

/// Binarized image plus its class label.
struct Sample {
    int label = 0;
    std::vector<std::uint8_t> pixels;
};

/// Visible layer = pixels followed by one unit per label.
struct RbmModel {
    Eigen::MatrixXd weights;  // visible x hidden
    Eigen::VectorXd visible_bias;
    Eigen::VectorXd hidden_bias;
    std::size_t label_units = 0;

    std::size_t visible() const { return static_cast<std::size_t>(weights.rows()); }
    std::size_t hidden() const { return static_cast<std::size_t>(weights.cols()); }
    std::size_t pixels() const { return visible() - label_units; }
    /// Throws DomainError on inconsistent dimensions or non-finite entries.
    void validate() const;
};

struct TrainConfig {
    std::size_t hidden = 32;
    std::size_t epochs = 20;
    double learning_rate = 0.05;
    std::size_t batch_size = 10;
    std::size_t label_units = 10;
    std::uint64_t seed = 0;
};

struct TrainResult {
    RbmModel model;
    /// Mean squared reconstruction error of each epoch, measured on the
    /// mini-batches as they were trained.
    std::vector<double> reconstruction_error;
};

TrainResult train_cd1(std::span<const Sample> dataset, const TrainConfig& config);

struct CrossbarConfig {
    /// (visible + 1) x (hidden + 1). Row `visible` carries the hidden
    /// biases (driven by a constant 1), column `hidden` the visible biases.
    Eigen::MatrixXd g_plus;
    Eigen::MatrixXd g_minus;
    double g_min = 0.0;
    double g_max = 0.0;
    double r_sense = 0.0;
    /// max |w| over weights and biases that maps onto g_max - g_min.
    double weight_scale = 0.0;
    std::size_t label_units = 0;

    std::size_t visible() const { return static_cast<std::size_t>(g_plus.rows()) - 1; }
    std::size_t hidden() const { return static_cast<std::size_t>(g_plus.cols()) - 1; }
};

/// Sense resistance at which a p-bit with barrier `design` reproduces the
/// trained sigmoid scaled by `gain`: 2 * kT-multiple * r * (g_max - g_min)
/// / weight_scale == gain.
double matched_sense_resistance(double weight_scale, double g_min, double g_max,
                                const EnergyBarrier& design, double gain = 1.0);

/// Differential conductance pairs: w >= 0 sets g_plus = g_min + (w /
/// weight_scale)(g_max - g_min), g_minus = g_min; negative w mirrors it.
CrossbarConfig map_weights(const RbmModel& model, double g_min, double g_max, double r_sense);

/// Normalized hidden-neuron drives for a binary visible vector, bias
/// included, clamped to [-1, 1].
std::vector<double> neuron_drive(const CrossbarConfig& crossbar,
                                 std::span<const std::uint8_t> visible);

/// Normalized visible-side drives from a binary hidden vector (the
/// crossbar read in the transposed direction), clamped to [-1, 1].
std::vector<double> visible_drive(const CrossbarConfig& crossbar,
                                  std::span<const std::uint8_t> hidden);

/// Number of high outputs in n_reads independent p-bit reads at `drive`.
std::size_t sample_pbit_highs(double drive, const EnergyBarrier& e_b, std::size_t n_reads,
                              Rng& rng);

/// Label firing frequencies before quantization. The image is clamped on
/// the pixel units and the network alternates hidden and label p-bit
/// updates for n_reads cycles, starting with all labels low; each entry is
/// the fraction of cycles the label neuron was high.
std::vector<double> infer_label_frequencies(const CrossbarConfig& crossbar,
                                            const EnergyBarrier& e_b,
                                            std::span<const std::uint8_t> image,
                                            std::size_t n_reads, std::uint64_t seed);

/// infer_label_frequencies followed by quantize_pir, one neuron per label.
PirTestcase infer_pir(const CrossbarConfig& crossbar, const EnergyBarrier& e_b,
                      std::span<const std::uint8_t> image, const PirConfig& pir,
                      std::uint64_t seed, std::string case_id = "0");

/// Runs infer_pir over a test set; case k uses stream seed
/// derive_stream_seed(seed, k) and id "k". Parallel over `threads`.
std::vector<PirTestcase> infer_dataset(const CrossbarConfig& crossbar, const EnergyBarrier& e_b,
                                       std::span<const Sample> samples, const PirConfig& pir,
                                       std::uint64_t seed, std::size_t threads = 1);

// --- files -----------------------------------------------------------------

inline constexpr std::string_view kModelMagic = "pbitsim-rbm";
inline constexpr int kModelVersion = 1;

std::string format_model(const RbmModel& model, std::span<const std::string> stamp = {});
RbmModel parse_model(std::string_view text);

/// Dataset CSV "label,pix0,...,pixN" with gray values in [0, 255]; pixels
/// are binarized at half scale (>= 128 is on). '#' lines and a
/// non-numeric header line are skipped.
std::vector<Sample> parse_dataset(std::string_view text);
std::string format_dataset(std::span<const Sample> samples);

/// Synthetic 8x8 patterns: class 0 horizontal line pairs, class 1
/// vertical line pairs, class 2 2x2 checkerboard (with two classes, class 1
/// is the checkerboard). Random offset per image, each pixel flipped with
/// probability `flip_noise`. Labels cycle 0, 1, 2, 0, ...
std::vector<Sample> make_pattern_set(std::size_t n, int n_classes, double flip_noise,
                                     std::uint64_t seed);

}  // namespace pbitsim::rbm
