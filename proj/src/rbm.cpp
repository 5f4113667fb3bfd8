#include "pbitsim/rbm.hpp"

#include "pbitsim/errors.hpp"
#include "pbitsim/text_io.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <numeric>
#include <random>
#include <thread>

namespace pbitsim::rbm {
namespace {

Eigen::VectorXd sigmoid(const Eigen::VectorXd& x) {
    return x.unaryExpr([](double v) { return logistic(v); });
}

Eigen::VectorXd joint_visible(const Sample& s, std::size_t label_units) {
    Eigen::VectorXd v = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(s.pixels.size() + label_units));
    for (std::size_t k = 0; k < s.pixels.size(); ++k) v[static_cast<Eigen::Index>(k)] = s.pixels[k];
    v[static_cast<Eigen::Index>(s.pixels.size()) + s.label] = 1.0;
    return v;
}

Eigen::VectorXd bernoulli(const Eigen::VectorXd& p, Rng& rng) {
    Eigen::VectorXd out(p.size());
    for (Eigen::Index k = 0; k < p.size(); ++k) out[k] = uniform01(rng) < p[k] ? 1.0 : 0.0;
    return out;
}

std::uint8_t pbit_read(double drive, const EnergyBarrier& e_b, Rng& rng) {
    return uniform01(rng) < p_high_from_drive(drive, e_b) ? 1 : 0;
}

}  // namespace

void RbmModel::validate() const {
    if (weights.rows() == 0 || weights.cols() == 0) throw DomainError("model has no units");
    if (visible_bias.size() != weights.rows() || hidden_bias.size() != weights.cols()) {
        throw DomainError("bias dimensions do not match weight matrix");
    }
    if (label_units == 0 || label_units >= visible()) {
        throw DomainError("label units must be between 1 and visible - 1");
    }
    if (!weights.allFinite() || !visible_bias.allFinite() || !hidden_bias.allFinite()) {
        throw DomainError("model contains non-finite values");
    }
}

TrainResult train_cd1(std::span<const Sample> dataset, const TrainConfig& config) {
    if (dataset.empty()) throw DomainError("training set is empty");
    if (config.hidden == 0 || config.label_units == 0 || config.batch_size == 0) {
        throw DomainError("hidden units, label units and batch size must be >= 1");
    }
    if (!(config.learning_rate > 0.0) || !std::isfinite(config.learning_rate)) {
        throw DomainError("learning rate must be > 0");
    }
    const std::size_t pixels = dataset.front().pixels.size();
    for (const auto& s : dataset) {
        if (s.pixels.size() != pixels) throw DomainError("images have inconsistent lengths");
        if (s.label < 0 || static_cast<std::size_t>(s.label) >= config.label_units) {
            throw DomainError("label " + std::to_string(s.label) + " outside [0, " +
                              std::to_string(config.label_units) + ")");
        }
    }
    if (pixels == 0) throw DomainError("images are empty");

    const auto n_vis = static_cast<Eigen::Index>(pixels + config.label_units);
    const auto n_hid = static_cast<Eigen::Index>(config.hidden);

    Rng rng(config.seed);
    std::normal_distribution<double> init(0.0, 0.01);
    TrainResult result;
    auto& m = result.model;
    m.label_units = config.label_units;
    m.weights = Eigen::MatrixXd::NullaryExpr(n_vis, n_hid, [&] { return init(rng); });
    m.visible_bias = Eigen::VectorXd::Zero(n_vis);
    m.hidden_bias = Eigen::VectorXd::Zero(n_hid);

    std::vector<std::size_t> order(dataset.size());
    std::iota(order.begin(), order.end(), std::size_t{0});

    for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
        std::shuffle(order.begin(), order.end(), rng);
        double squared_error = 0.0;
        for (std::size_t start = 0; start < order.size(); start += config.batch_size) {
            const std::size_t stop = std::min(order.size(), start + config.batch_size);
            Eigen::MatrixXd dw = Eigen::MatrixXd::Zero(n_vis, n_hid);
            Eigen::VectorXd db = Eigen::VectorXd::Zero(n_vis);
            Eigen::VectorXd dc = Eigen::VectorXd::Zero(n_hid);
            for (std::size_t b = start; b < stop; ++b) {
                const Eigen::VectorXd v0 = joint_visible(dataset[order[b]], config.label_units);
                const Eigen::VectorXd h0p = sigmoid(m.weights.transpose() * v0 + m.hidden_bias);
                const Eigen::VectorXd h0 = bernoulli(h0p, rng);
                const Eigen::VectorXd v1p = sigmoid(m.weights * h0 + m.visible_bias);
                const Eigen::VectorXd h1p = sigmoid(m.weights.transpose() * v1p + m.hidden_bias);
                dw += v0 * h0p.transpose() - v1p * h1p.transpose();
                db += v0 - v1p;
                dc += h0p - h1p;
                squared_error += (v0 - v1p).squaredNorm() / static_cast<double>(n_vis);
            }
            const double step = config.learning_rate / static_cast<double>(stop - start);
            m.weights += step * dw;
            m.visible_bias += step * db;
            m.hidden_bias += step * dc;
        }
        result.reconstruction_error.push_back(squared_error / static_cast<double>(dataset.size()));
    }
    return result;
}

double matched_sense_resistance(double weight_scale, double g_min, double g_max,
                                const EnergyBarrier& design, double gain) {
    if (!(g_max > g_min && g_min > 0.0)) throw DomainError("conductance bounds need g_max > g_min > 0");
    if (!(design.kt_multiple() > 0.0)) throw DomainError("design barrier must be > 0 kT");
    if (!(gain > 0.0) || !std::isfinite(gain)) throw DomainError("gain must be > 0");
    if (weight_scale <= 0.0) return 1.0 / (g_max - g_min);
    return gain * weight_scale / (2.0 * design.kt_multiple() * (g_max - g_min));
}

CrossbarConfig map_weights(const RbmModel& model, double g_min, double g_max, double r_sense) {
    model.validate();
    if (!(g_min > 0.0 && g_max > g_min) || !std::isfinite(g_max)) {
        throw DomainError("conductance bounds need g_max > g_min > 0");
    }
    if (!(r_sense > 0.0) || !std::isfinite(r_sense)) throw DomainError("sense resistance must be > 0");

    const auto V = model.weights.rows();
    const auto H = model.weights.cols();
    Eigen::MatrixXd w = Eigen::MatrixXd::Zero(V + 1, H + 1);
    w.topLeftCorner(V, H) = model.weights;
    w.row(V).head(H) = model.hidden_bias.transpose();
    w.col(H).head(V) = model.visible_bias;

    CrossbarConfig cb;
    cb.g_min = g_min;
    cb.g_max = g_max;
    cb.r_sense = r_sense;
    cb.label_units = model.label_units;
    cb.weight_scale = w.cwiseAbs().maxCoeff();
    cb.g_plus = Eigen::MatrixXd::Constant(V + 1, H + 1, g_min);
    cb.g_minus = cb.g_plus;
    if (cb.weight_scale > 0.0) {
        const double span = g_max - g_min;
        for (Eigen::Index r = 0; r <= V; ++r) {
            for (Eigen::Index c = 0; c <= H; ++c) {
                const double x = w(r, c);
                const double g = g_min + (std::abs(x) / cb.weight_scale) * span;
                if (x >= 0.0) {
                    cb.g_plus(r, c) = g;
                } else {
                    cb.g_minus(r, c) = g;
                }
            }
        }
    }
    return cb;
}

std::vector<double> neuron_drive(const CrossbarConfig& crossbar,
                                 std::span<const std::uint8_t> visible) {
    const auto V = crossbar.visible();
    const auto H = crossbar.hidden();
    if (visible.size() != V) {
        throw DomainError("visible vector has " + std::to_string(visible.size()) +
                          " entries, crossbar has " + std::to_string(V) + " rows");
    }
    std::vector<double> drives(H);
    const auto bias_row = static_cast<Eigen::Index>(V);
    for (std::size_t j = 0; j < H; ++j) {
        const auto col = static_cast<Eigen::Index>(j);
        double current = crossbar.g_plus(bias_row, col) - crossbar.g_minus(bias_row, col);
        for (std::size_t k = 0; k < V; ++k) {
            if (visible[k] != 0) {
                const auto row = static_cast<Eigen::Index>(k);
                current += crossbar.g_plus(row, col) - crossbar.g_minus(row, col);
            }
        }
        drives[j] = std::clamp(crossbar.r_sense * current, -1.0, 1.0);
    }
    return drives;
}

std::vector<double> visible_drive(const CrossbarConfig& crossbar,
                                  std::span<const std::uint8_t> hidden) {
    const auto V = crossbar.visible();
    const auto H = crossbar.hidden();
    if (hidden.size() != H) {
        throw DomainError("hidden vector has " + std::to_string(hidden.size()) +
                          " entries, crossbar has " + std::to_string(H) + " columns");
    }
    std::vector<double> drives(V);
    const auto bias_col = static_cast<Eigen::Index>(H);
    for (std::size_t k = 0; k < V; ++k) {
        const auto row = static_cast<Eigen::Index>(k);
        double current = crossbar.g_plus(row, bias_col) - crossbar.g_minus(row, bias_col);
        for (std::size_t j = 0; j < H; ++j) {
            if (hidden[j] != 0) {
                const auto col = static_cast<Eigen::Index>(j);
                current += crossbar.g_plus(row, col) - crossbar.g_minus(row, col);
            }
        }
        drives[k] = std::clamp(crossbar.r_sense * current, -1.0, 1.0);
    }
    return drives;
}

std::size_t sample_pbit_highs(double drive, const EnergyBarrier& e_b, std::size_t n_reads,
                              Rng& rng) {
    std::size_t highs = 0;
    for (std::size_t r = 0; r < n_reads; ++r) highs += pbit_read(drive, e_b, rng);
    return highs;
}

std::vector<double> infer_label_frequencies(const CrossbarConfig& crossbar,
                                            const EnergyBarrier& e_b,
                                            std::span<const std::uint8_t> image,
                                            std::size_t n_reads, std::uint64_t seed) {
    const auto V = crossbar.visible();
    const auto L = crossbar.label_units;
    if (image.size() + L != V) {
        throw DomainError("image has " + std::to_string(image.size()) + " pixels, crossbar expects " +
                          std::to_string(V - L));
    }
    if (n_reads == 0) throw DomainError("need at least one read");

    Rng rng(seed);
    std::vector<std::uint8_t> visible(image.begin(), image.end());
    visible.resize(V, 0);
    std::vector<std::uint8_t> hidden(crossbar.hidden());
    std::vector<std::size_t> highs(L, 0);
    for (std::size_t r = 0; r < n_reads; ++r) {
        const auto h_drive = neuron_drive(crossbar, visible);
        for (std::size_t j = 0; j < hidden.size(); ++j) hidden[j] = pbit_read(h_drive[j], e_b, rng);
        const auto v_drive = visible_drive(crossbar, hidden);
        for (std::size_t l = 0; l < L; ++l) {
            const auto bit = pbit_read(v_drive[V - L + l], e_b, rng);
            visible[V - L + l] = bit;
            highs[l] += bit;
        }
    }
    std::vector<double> freq(L);
    for (std::size_t l = 0; l < L; ++l) {
        freq[l] = static_cast<double>(highs[l]) / static_cast<double>(n_reads);
    }
    return freq;
}

PirTestcase infer_pir(const CrossbarConfig& crossbar, const EnergyBarrier& e_b,
                      std::span<const std::uint8_t> image, const PirConfig& pir,
                      std::uint64_t seed, std::string case_id) {
    pir.validate();
    const auto freq = infer_label_frequencies(crossbar, e_b, image, pir.n_reads, seed);
    PirTestcase tc{std::move(case_id), {}};
    tc.neurons.reserve(freq.size());
    for (std::size_t l = 0; l < freq.size(); ++l) {
        tc.neurons.push_back({static_cast<int>(l), quantize_pir(freq[l], pir.bits)});
    }
    return tc;
}

std::vector<PirTestcase> infer_dataset(const CrossbarConfig& crossbar, const EnergyBarrier& e_b,
                                       std::span<const Sample> samples, const PirConfig& pir,
                                       std::uint64_t seed, std::size_t threads) {
    pir.validate();
    std::vector<PirTestcase> out(samples.size());
    std::atomic<std::size_t> next{0};
    std::vector<std::exception_ptr> errors(samples.size());
    auto worker = [&] {
        for (std::size_t k = next.fetch_add(1); k < samples.size(); k = next.fetch_add(1)) {
            try {
                out[k] = infer_pir(crossbar, e_b, samples[k].pixels, pir,
                                   derive_stream_seed(seed, k), std::to_string(k));
            } catch (...) {
                errors[k] = std::current_exception();
            }
        }
    };
    if (threads == 0) threads = std::thread::hardware_concurrency();
    threads = std::clamp<std::size_t>(threads, 1, std::max<std::size_t>(samples.size(), 1));
    if (threads == 1) {
        worker();
    } else {
        std::vector<std::jthread> pool;
        for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(worker);
    }
    for (const auto& e : errors) {
        if (e) std::rethrow_exception(e);
    }
    return out;
}

// --- files -----------------------------------------------------------------

namespace {

void append_row(std::string& out, const auto& values) {
    for (Eigen::Index k = 0; k < values.size(); ++k) {
        if (k > 0) out += ' ';
        out += text::format_double(values[k]);
    }
    out += '\n';
}

class LineCursor {
public:
    explicit LineCursor(std::string_view text) : lines_(text::lines(text)) {}

    /// Next line that is neither blank nor a '#' comment.
    std::string_view next(const char* expecting) {
        while (pos_ < lines_.size()) {
            const auto line = text::trim(lines_[pos_++]);
            if (!line.empty() && line.front() != '#') return line;
        }
        throw ParseError(std::string("unexpected end of model file, expecting ") + expecting, 0);
    }
    std::size_t line_no() const { return pos_; }

    Eigen::VectorXd values(Eigen::Index count, const char* what) {
        const auto fields = text::split_whitespace(next(what));
        if (static_cast<Eigen::Index>(fields.size()) != count) {
            throw ParseError(std::string(what) + ": expected " + std::to_string(count) + " values",
                             line_no());
        }
        Eigen::VectorXd v(count);
        for (Eigen::Index k = 0; k < count; ++k) {
            const auto x = text::parse_double(fields[static_cast<std::size_t>(k)]);
            if (!x || !std::isfinite(*x)) throw ParseError(std::string(what) + ": bad number", line_no());
            v[k] = *x;
        }
        return v;
    }

    void expect(std::string_view keyword) {
        if (next(keyword.data()) != keyword) {
            throw ParseError("expected '" + std::string(keyword) + "'", line_no());
        }
    }

private:
    std::vector<std::string_view> lines_;
    std::size_t pos_ = 0;
};

}  // namespace

std::string format_model(const RbmModel& model, std::span<const std::string> stamp) {
    model.validate();
    std::string out;
    for (const auto& s : stamp) out += "# " + s + "\n";
    out += std::string(kModelMagic) + " " + std::to_string(kModelVersion) + "\n";
    out += "visible " + std::to_string(model.visible()) + " hidden " + std::to_string(model.hidden()) +
           " labels " + std::to_string(model.label_units) + "\n";
    out += "weights\n";
    for (Eigen::Index r = 0; r < model.weights.rows(); ++r) append_row(out, model.weights.row(r));
    out += "visible_bias\n";
    append_row(out, model.visible_bias);
    out += "hidden_bias\n";
    append_row(out, model.hidden_bias);
    return out;
}

RbmModel parse_model(std::string_view text) {
    LineCursor cur(text);
    const auto magic = text::split_whitespace(cur.next("header"));
    if (magic.size() != 2 || magic[0] != kModelMagic) {
        throw ParseError("not a pbitsim RBM model file", cur.line_no());
    }
    if (magic[1] != std::to_string(kModelVersion)) {
        throw ParseError("unsupported model version " + std::string(magic[1]), cur.line_no());
    }
    const auto dims = text::split_whitespace(cur.next("dimensions"));
    if (dims.size() != 6 || dims[0] != "visible" || dims[2] != "hidden" || dims[4] != "labels") {
        throw ParseError("expected 'visible V hidden H labels L'", cur.line_no());
    }
    const auto V = text::parse_int(dims[1]);
    const auto H = text::parse_int(dims[3]);
    const auto L = text::parse_int(dims[5]);
    if (!V || !H || !L || *V <= 0 || *H <= 0 || *L <= 0) {
        throw ParseError("bad model dimensions", cur.line_no());
    }
    RbmModel m;
    m.label_units = static_cast<std::size_t>(*L);
    m.weights.resize(*V, *H);
    cur.expect("weights");
    for (Eigen::Index r = 0; r < *V; ++r) m.weights.row(r) = cur.values(*H, "weights").transpose();
    cur.expect("visible_bias");
    m.visible_bias = cur.values(*V, "visible_bias");
    cur.expect("hidden_bias");
    m.hidden_bias = cur.values(*H, "hidden_bias");
    m.validate();
    return m;
}

std::vector<Sample> parse_dataset(std::string_view text) {
    std::vector<Sample> out;
    const auto all = text::lines(text);
    bool first_record = true;
    for (std::size_t n = 0; n < all.size(); ++n) {
        const auto line = text::trim(all[n]);
        if (line.empty() || line.front() == '#') continue;
        const auto fields = text::split(line, ',');
        const auto label = text::parse_int(text::trim(fields[0]));
        if (!label) {
            if (first_record) {
                first_record = false;
                continue;  // header
            }
            throw ParseError("label is not an integer", n + 1);
        }
        first_record = false;
        if (*label < 0) throw ParseError("negative label", n + 1);
        Sample s;
        s.label = static_cast<int>(*label);
        s.pixels.reserve(fields.size() - 1);
        for (std::size_t k = 1; k < fields.size(); ++k) {
            const auto gray = text::parse_double(text::trim(fields[k]));
            if (!gray || *gray < 0.0 || *gray > 255.0) {
                throw ParseError("pixel " + std::to_string(k - 1) + " not in [0, 255]", n + 1);
            }
            s.pixels.push_back(*gray / 255.0 >= 0.5 ? 1 : 0);
        }
        if (!out.empty() && s.pixels.size() != out.front().pixels.size()) {
            throw ParseError("record has " + std::to_string(s.pixels.size()) + " pixels, expected " +
                                 std::to_string(out.front().pixels.size()),
                             n + 1);
        }
        out.push_back(std::move(s));
    }
    return out;
}

std::string format_dataset(std::span<const Sample> samples) {
    std::string out;
    for (const auto& s : samples) {
        out += std::to_string(s.label);
        for (auto px : s.pixels) out += px ? ",255" : ",0";
        out += '\n';
    }
    return out;
}

}  // namespace pbitsim::rbm
