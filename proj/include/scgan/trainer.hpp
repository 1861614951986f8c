#ifndef SCGAN_TRAINER_HPP
#define SCGAN_TRAINER_HPP

#include <nlohmann/json.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <memory>
#include <string>
#include <vector>

#include "scgan/adam.hpp"
#include "scgan/augment.hpp"
#include "scgan/checkpoint.hpp"
#include "scgan/dataset.hpp"
#include "scgan/losses.hpp"
#include "scgan/nn.hpp"
#include "scgan/pool.hpp"
#include "scgan/png_io.hpp"
#include "scgan/rng.hpp"

namespace scgan {

// ---------------------------------------------------------------------------
// Training loop: alternating generator / discriminator updates.
//
// Every random decision (epoch shuffles, crop/flip draws, transform
// parameters, crop quadrants, pool swaps) comes from a stream derived from
// (seed, purpose, counters), never from mutable shared rng state. A resumed
// run therefore replays exactly the steps an uninterrupted run would have
// taken, and checkpoints only need counters, parameters, optimizer moments,
// and pool contents.
// ---------------------------------------------------------------------------

// Coarse wall-clock phase timings on stderr when SCGAN_TIMING is set; purely
// diagnostic, never part of the run's outputs.
namespace trainer_detail {

inline bool timing_enabled() {
    static const bool on = std::getenv("SCGAN_TIMING") != nullptr;
    return on;
}

class PhaseTimer {
  public:
    explicit PhaseTimer(const char* label)
        : label_(label), start_(std::chrono::steady_clock::now()) {}
    ~PhaseTimer() {
        if (!timing_enabled()) return;
        const auto ms = std::chrono::duration<double, std::milli>(
                            std::chrono::steady_clock::now() - start_)
                            .count();
        std::fprintf(stderr, "[timing] %s %.1f ms\n", label_, ms);
    }

  private:
    const char* label_;
    std::chrono::steady_clock::time_point start_;
};

} // namespace trainer_detail

struct TrainConfig {
    std::string data_root;
    std::size_t image_size = 64;
    std::size_t epochs = 200;
    std::size_t batch_size = 8;
    double lr = 0.0002;
    double beta1 = 0.5, beta2 = 0.999;
    double lambda_cyc = 10.0;
    double lambda_id = 0.5;
    bool ssl = true;
    double ssl_weight = 1.0;
    std::string diffaug = "off"; // "off" or policy tokens like "color,cutout"
    std::size_t pool_size = 50;
    std::uint64_t seed = 1;
    std::string checkpoint_dir;
    std::size_t log_every = 1;

    DiffAugPolicy diffaug_policy() const {
        return diffaug == "off" ? DiffAugPolicy{} : parse_policy(diffaug);
    }

    LossWeights weights() const {
        LossWeights w;
        w.lambda_cyc = lambda_cyc;
        w.lambda_id = lambda_id;
        w.ssl_weight = ssl_weight;
        return w;
    }

    void validate() const {
        SCGAN_CHECK(!data_root.empty(), ConfigError, "data_root is required");
        SCGAN_CHECK(!checkpoint_dir.empty(), ConfigError,
                    "checkpoint_dir is required");
        SCGAN_CHECK(batch_size >= 1, ConfigError, "batch_size must be >= 1");
        SCGAN_CHECK(lr > 0, ConfigError, "lr must be > 0");
        SCGAN_CHECK(epochs >= 1, ConfigError, "epochs must be >= 1");
        SCGAN_CHECK(log_every >= 1, ConfigError, "log_every must be >= 1");
        SCGAN_CHECK(lambda_cyc >= 0 && lambda_id >= 0 && ssl_weight >= 0,
                    ConfigError, "loss weights must be non-negative");
        diffaug_policy(); // validates tokens
    }

    nlohmann::json to_json() const {
        return {{"data_root", data_root},   {"image_size", image_size},
                {"epochs", epochs},         {"batch_size", batch_size},
                {"lr", lr},                 {"beta1", beta1},
                {"beta2", beta2},           {"lambda_cyc", lambda_cyc},
                {"lambda_id", lambda_id},   {"ssl", ssl},
                {"ssl_weight", ssl_weight}, {"diffaug", diffaug},
                {"pool_size", pool_size},   {"seed", seed},
                {"checkpoint_dir", checkpoint_dir},
                {"log_every", log_every}};
    }
};

// UTF-8 `key = value` lines; '#' starts a comment; unknown keys rejected.
inline TrainConfig parse_config_text(const std::string& text) {
    TrainConfig cfg;
    auto trim = [](std::string s) {
        const char* ws = " \t\r";
        const std::size_t a = s.find_first_not_of(ws);
        if (a == std::string::npos) return std::string();
        const std::size_t b = s.find_last_not_of(ws);
        return s.substr(a, b - a + 1);
    };
    auto parse_bool = [](const std::string& v, const std::string& key) {
        if (v == "on" || v == "true" || v == "1") return true;
        if (v == "off" || v == "false" || v == "0") return false;
        fail<ConfigError>("config key ", key, " expects on/off, got '", v, "'");
    };
    std::size_t line_no = 0, pos = 0;
    while (pos <= text.size()) {
        std::size_t nl = text.find('\n', pos);
        if (nl == std::string::npos) nl = text.size();
        std::string line = text.substr(pos, nl - pos);
        pos = nl + 1;
        ++line_no;
        const std::size_t hash = line.find('#');
        if (hash != std::string::npos) line.resize(hash);
        line = trim(line);
        if (line.empty()) continue;
        const std::size_t eq = line.find('=');
        SCGAN_CHECK(eq != std::string::npos, ConfigError, "config line ",
                    line_no, " is not 'key = value': ", line);
        const std::string key = trim(line.substr(0, eq));
        const std::string val = trim(line.substr(eq + 1));
        try {
            if (key == "data_root") cfg.data_root = val;
            else if (key == "image_size") cfg.image_size = std::stoul(val);
            else if (key == "epochs") cfg.epochs = std::stoul(val);
            else if (key == "batch_size") cfg.batch_size = std::stoul(val);
            else if (key == "lr") cfg.lr = std::stod(val);
            else if (key == "beta1") cfg.beta1 = std::stod(val);
            else if (key == "beta2") cfg.beta2 = std::stod(val);
            else if (key == "lambda_cyc") cfg.lambda_cyc = std::stod(val);
            else if (key == "lambda_id") cfg.lambda_id = std::stod(val);
            else if (key == "ssl") cfg.ssl = parse_bool(val, key);
            else if (key == "ssl_weight") cfg.ssl_weight = std::stod(val);
            else if (key == "diffaug") cfg.diffaug = val;
            else if (key == "pool_size") cfg.pool_size = std::stoul(val);
            else if (key == "seed") cfg.seed = std::stoull(val);
            else if (key == "checkpoint_dir") cfg.checkpoint_dir = val;
            else if (key == "log_every") cfg.log_every = std::stoul(val);
            else fail<ConfigError>("unknown config key: ", key);
        } catch (const std::invalid_argument&) {
            fail<ConfigError>("config key ", key, " has a malformed value: '",
                              val, "'");
        } catch (const std::out_of_range&) {
            fail<ConfigError>("config key ", key, " has an out-of-range value: '",
                              val, "'");
        }
    }
    return cfg;
}

inline TrainConfig parse_config_file(const std::string& path) {
    std::ifstream f(path);
    SCGAN_CHECK(f.good(), IoError, "cannot read config file ", path);
    std::string text((std::istreambuf_iterator<char>(f)),
                     std::istreambuf_iterator<char>());
    return parse_config_text(text);
}

inline std::string model_name(const TrainConfig& cfg) {
    if (cfg.ssl) return "scgan";
    if (cfg.diffaug_policy().any()) return "cyclegan-diffaug";
    return "cyclegan-baseline";
}

// Constant for the first half of training, then linear decay to zero at
// epoch == epochs. Non-increasing in epoch.
inline double lr_schedule(std::size_t epoch, const TrainConfig& cfg) {
    SCGAN_CHECK(epoch < cfg.epochs, ArgumentError, "epoch ", epoch,
                " out of range [0, ", cfg.epochs, ")");
    const double half = double(cfg.epochs) / 2.0;
    if (double(epoch) < half) return cfg.lr;
    return cfg.lr * (1.0 - (double(epoch) - half) / half);
}

// Optional per-step observability for tests: what the pools returned and
// which transform parameters / crop quadrants the step drew.
struct StepTrace {
    TensorF pooled_fake_a, pooled_fake_b;
    DiffAugParams<float> aug_dx, aug_dy;
    std::size_t quadrant_dx = 0, quadrant_dy = 0;
};

struct TrainState {
    std::size_t epoch = 0; // next epoch to execute
    std::uint64_t global_step = 0;
    LossBreakdown last_losses;
};

class Trainer {
public:
    explicit Trainer(const TrainConfig& cfg)
        : cfg_(cfg), policy_(cfg.diffaug_policy()),
          model_(cfg.image_size, cfg.seed),
          opt_gen_(model_.generator_params(), cfg.beta1, cfg.beta2),
          opt_disc_(model_.discriminator_params(), cfg.beta1, cfg.beta2),
          pool_a_(cfg.pool_size), pool_b_(cfg.pool_size) {
        cfg_.validate();
    }

    TranslationModel<float>& model() { return model_; }
    const TrainState& state() const { return state_; }

    // One optimization step on a pair of same-size batches.
    LossBreakdown train_step(const TensorF& batch_a, const TensorF& batch_b,
                             StepTrace* trace = nullptr) {
        const Shape& sa = batch_a.shape();
        SCGAN_CHECK(sa.rank() == 4 && sa == batch_b.shape(), DimensionError,
                    "train_step expects equal-shape rank-4 batches");
        SCGAN_CHECK(sa[2] == cfg_.image_size && sa[3] == cfg_.image_size,
                    DimensionError, "batch is ", sa[2], "x", sa[3],
                    ", config says ", cfg_.image_size);
        const std::size_t n = sa[0];
        const double lr = lr_schedule(state_.epoch, cfg_);
        LossBreakdown parts;

        // Per-step randomness, all derived from (seed, purpose, step).
        Rng aug_rng_dx = Rng::stream(cfg_.seed, "diffaug.dx", state_.global_step);
        Rng aug_rng_dy = Rng::stream(cfg_.seed, "diffaug.dy", state_.global_step);
        auto prm_dx = DiffAugParams<float>::sample(policy_, n, cfg_.image_size,
                                                   aug_rng_dx);
        auto prm_dy = DiffAugParams<float>::sample(policy_, n, cfg_.image_size,
                                                   aug_rng_dy);
        Rng quad_rng = Rng::stream(cfg_.seed, "quadrant", state_.global_step);
        const auto q_dx = static_cast<Quadrant>(quad_rng.uniform_index(4));
        const auto q_dy = static_cast<Quadrant>(quad_rng.uniform_index(4));

        TensorF fake_a_detached, fake_b_detached;

        // --- phase 1: generators --------------------------------------
        set_requires_grad(model_.generator_params(), true);
        set_requires_grad(model_.discriminator_params(), false);
        {
            trainer_detail::PhaseTimer t("phase1");
            VarF x = make_leaf(batch_a), y = make_leaf(batch_b);
            // gen_ab sees [x; y]: translations and identity targets in one
            // pass; gen_ba sees [y; x; y_hat]: translations, identities,
            // and the A-side cycle.
            VarF g_out = model_.gen_ab(concat_batch<float>({x, y}));
            VarF y_hat = slice_batch(g_out, 0, n);
            VarF id_y = slice_batch(g_out, n, 2 * n);
            VarF f_out = model_.gen_ba(concat_batch<float>({y, x, y_hat}));
            VarF x_hat = slice_batch(f_out, 0, n);
            VarF id_x = slice_batch(f_out, n, 2 * n);
            VarF x_cyc = slice_batch(f_out, 2 * n, 3 * n);
            VarF y_cyc = model_.gen_ab(x_hat);

            VarF adv_g = lsgan_generator_loss(
                model_.disc_b(diffaug_apply(y_hat, policy_, prm_dy)).logits);
            VarF adv_f = lsgan_generator_loss(
                model_.disc_a(diffaug_apply(x_hat, policy_, prm_dx)).logits);
            VarF cyc = cycle_loss(x, x_cyc, y, y_cyc);
            VarF idl = identity_loss(x, id_x, y, id_y);
            VarF g_total =
                add(add(adv_g, adv_f),
                    add(mul_scalar(cyc, float(cfg_.lambda_cyc)),
                        mul_scalar(idl, float(cfg_.lambda_id))));

            parts.adv_g = scalar(adv_g);
            parts.adv_f = scalar(adv_f);
            parts.cyc = scalar(cyc);
            parts.id = scalar(idl);

            fake_a_detached = x_hat->value; // copies before graph release
            fake_b_detached = y_hat->value;

            for (const auto& [_, p] : model_.params.items()) zero_grad(p);
            backward(g_total);
            opt_gen_.step(lr);
        }

        // --- phase 2: discriminators ----------------------------------
        set_requires_grad(model_.generator_params(), false);
        set_requires_grad(model_.discriminator_params(), true);
        {
            trainer_detail::PhaseTimer t("phase2");
            Rng pool_rng_a = Rng::stream(cfg_.seed, "pool.a", state_.global_step);
            Rng pool_rng_b = Rng::stream(cfg_.seed, "pool.b", state_.global_step);
            TensorF fake_a = pool_a_.query(fake_a_detached, pool_rng_a);
            TensorF fake_b = pool_b_.query(fake_b_detached, pool_rng_b);
            if (trace) {
                trace->pooled_fake_a = fake_a;
                trace->pooled_fake_b = fake_b;
                trace->aug_dx = prm_dx;
                trace->aug_dy = prm_dy;
                trace->quadrant_dx = static_cast<std::size_t>(q_dx);
                trace->quadrant_dy = static_cast<std::size_t>(q_dy);
            }

            // The same per-item transforms wrap every input a
            // discriminator sees this step, real and fake alike.
            VarF real_a = diffaug_apply(make_leaf(batch_a), policy_, prm_dx);
            VarF real_b = diffaug_apply(make_leaf(batch_b), policy_, prm_dy);
            DiscOutput<float> out_a = model_.disc_a(real_a);
            DiscOutput<float> out_b = model_.disc_b(real_b);
            VarF adv_dx = lsgan_discriminator_loss(
                out_a.logits,
                model_.disc_a(diffaug_apply(make_leaf(fake_a), policy_, prm_dx))
                    .logits);
            VarF adv_dy = lsgan_discriminator_loss(
                out_b.logits,
                model_.disc_b(diffaug_apply(make_leaf(fake_b), policy_, prm_dy))
                    .logits);
            parts.adv_dx = scalar(adv_dx);
            parts.adv_dy = scalar(adv_dy);

            VarF d_total = add(adv_dx, adv_dy);
            if (cfg_.ssl) {
                // Reconstruction targets come from the real images the
                // discriminators actually saw — never from generated ones.
                VarF ssl_dx = ssl_term(model_.disc_a, out_a, real_a->value, q_dx);
                VarF ssl_dy = ssl_term(model_.disc_b, out_b, real_b->value, q_dy);
                parts.ssl_dx = scalar(ssl_dx);
                parts.ssl_dy = scalar(ssl_dy);
                d_total = add(d_total,
                              mul_scalar(add(ssl_dx, ssl_dy),
                                         float(cfg_.ssl_weight)));
            }

            for (const auto& [_, p] : model_.params.items()) zero_grad(p);
            backward(d_total);
            opt_disc_.step(lr);
        }

        LossBreakdown breakdown = total_loss(parts, cfg_.weights());
        state_.last_losses = breakdown;
        ++state_.global_step;
        return breakdown;
    }

    // Run (or resume) the full schedule. stop_after_epoch caps how many
    // epochs this invocation executes, simulating an interruption at an
    // epoch boundary; the run stays resumable either way.
    TrainState fit(std::size_t stop_after_epoch = SIZE_MAX) {
        namespace fs = std::filesystem;
        UnpairedDataset<float> data =
            UnpairedDataset<float>::load({cfg_.data_root, cfg_.image_size});
        const std::size_t steps =
            steps_per_epoch(data.train_a.count(), data.train_b.count(),
                            cfg_.batch_size);
        fs::create_directories(cfg_.checkpoint_dir);
        const std::string last_dir = cfg_.checkpoint_dir + "/last";

        bool resumed = false;
        if (fs::exists(last_dir + "/state.json")) {
            load_full_checkpoint(last_dir);
            resumed = true;
        }

        const std::string log_path = cfg_.checkpoint_dir + "/train_log.jsonl";
        std::ofstream log(log_path, resumed ? std::ios::app : std::ios::trunc);
        SCGAN_CHECK(log.good(), IoError, "cannot open log ", log_path);
        if (!resumed) {
            nlohmann::json header = {{"model", model_name(cfg_)},
                                     {"config", cfg_.to_json()}};
            log << header.dump() << "\n";
            log.flush();
        }

        const std::size_t end_epoch =
            std::min(cfg_.epochs,
                     stop_after_epoch == SIZE_MAX ? cfg_.epochs
                                                  : stop_after_epoch);
        for (; state_.epoch < end_epoch; ++state_.epoch) {
            const std::size_t epoch = state_.epoch;
            const auto order_a =
                epoch_order(data.train_a.count(), steps * cfg_.batch_size,
                            cfg_.seed, epoch, 0);
            const auto order_b =
                epoch_order(data.train_b.count(), steps * cfg_.batch_size,
                            cfg_.seed, epoch, 1);
            for (std::size_t s = 0; s < steps; ++s) {
                Rng aug_a = Rng::stream(cfg_.seed, "aug.a", epoch, s);
                Rng aug_b = Rng::stream(cfg_.seed, "aug.b", epoch, s);
                TensorF ba = standard_augment(
                    gather_batch(data.train_a, order_a, s * cfg_.batch_size,
                                 cfg_.batch_size),
                    aug_a);
                TensorF bb = standard_augment(
                    gather_batch(data.train_b, order_b, s * cfg_.batch_size,
                                 cfg_.batch_size),
                    aug_b);
                const std::uint64_t step_id = state_.global_step;
                LossBreakdown losses;
                try {
                    losses = train_step(ba, bb);
                } catch (const NumericError& e) {
                    const std::string ref =
                        fs::exists(last_dir)
                            ? last_dir
                            : std::string("none (no epoch completed)");
                    fail<NumericError>(e.what(),
                                       "; aborting — last good checkpoint: ",
                                       ref);
                }
                if (step_id % cfg_.log_every == 0) {
                    nlohmann::json line = {
                        {"step", step_id},      {"epoch", epoch},
                        {"lr", lr_schedule(epoch, cfg_)},
                        {"adv_g", losses.adv_g}, {"adv_f", losses.adv_f},
                        {"adv_dx", losses.adv_dx}, {"adv_dy", losses.adv_dy},
                        {"ssl_dx", losses.ssl_dx}, {"ssl_dy", losses.ssl_dy},
                        {"cyc", losses.cyc},     {"id", losses.id},
                        {"total", losses.total}};
                    log << line.dump() << "\n";
                    log.flush();
                }
            }
            // state_.epoch still holds the epoch just finished; persist
            // with epoch+1 as the next one to run.
            {
                trainer_detail::PhaseTimer t("checkpoint");
                save_full_checkpoint(last_dir, state_.epoch + 1);
            }
            {
                trainer_detail::PhaseTimer t("samples");
                write_sample_grid(data, cfg_.checkpoint_dir + "/samples",
                                  epoch);
            }
        }
        return state_;
    }

    // --- checkpointing ----------------------------------------------------

    void save_full_checkpoint(const std::string& dir, std::size_t next_epoch) {
        namespace fs = std::filesystem;
        const std::string tmp = dir + ".tmp";
        if (fs::exists(tmp)) fs::remove_all(tmp);
        save_model_params(tmp, model_);
        save_optimizer(tmp + "/opt", "gen", opt_gen_);
        save_optimizer(tmp + "/opt", "disc", opt_disc_);
        save_pool(tmp + "/pool_a.bin", pool_a_);
        save_pool(tmp + "/pool_b.bin", pool_b_);

        nlohmann::json state = {{"model", model_name(cfg_)},
                                {"epoch", next_epoch},
                                {"global_step", state_.global_step},
                                {"opt_gen_t", opt_gen_.step_count()},
                                {"opt_disc_t", opt_disc_.step_count()},
                                {"pool_a", pool_a_.stored_count()},
                                {"pool_b", pool_b_.stored_count()},
                                {"config", cfg_.to_json()}};
        std::ofstream sf(tmp + "/state.json");
        SCGAN_CHECK(sf.good(), IoError, "cannot write state.json in ", tmp);
        sf << state.dump(2) << "\n";
        sf.close();
        commit_dir(tmp, dir);
    }

    void load_full_checkpoint(const std::string& dir) {
        std::ifstream sf(dir + "/state.json");
        SCGAN_CHECK(sf.good(), IoError, "missing state.json in ", dir);
        nlohmann::json state = nlohmann::json::parse(sf);
        check_config_match(state.at("config"));
        load_model_params(dir, model_);
        load_optimizer(dir + "/opt", "gen", opt_gen_);
        load_optimizer(dir + "/opt", "disc", opt_disc_);
        opt_gen_.set_step_count(state.at("opt_gen_t").get<std::uint64_t>());
        opt_disc_.set_step_count(state.at("opt_disc_t").get<std::uint64_t>());
        load_pool(dir + "/pool_a.bin", state.at("pool_a").get<std::size_t>(),
                  pool_a_);
        load_pool(dir + "/pool_b.bin", state.at("pool_b").get<std::size_t>(),
                  pool_b_);
        state_.epoch = state.at("epoch").get<std::size_t>();
        state_.global_step = state.at("global_step").get<std::uint64_t>();
    }

private:
    // Self-supervised term for one discriminator: decode the tapped
    // features of the real batch and compare against degraded views of the
    // same real batch.
    VarF ssl_term(SslDiscriminator<float>& disc, const DiscOutput<float>& out,
                  const TensorF& real_image, Quadrant q) {
        VarF dec_full = disc.decode_full(out.f_full);
        VarF dec_part = disc.decode_part(out.f_part, q);
        TensorF target_full = bilinear_resize(real_image, 64, 64);
        const std::size_t s = real_image.shape()[2];
        const std::size_t h0 =
            (q == Quadrant::bottom_left || q == Quadrant::bottom_right) ? s / 2
                                                                        : 0;
        const std::size_t w0 =
            (q == Quadrant::top_right || q == Quadrant::bottom_right) ? s / 2
                                                                      : 0;
        TensorF quad(Shape{real_image.shape()[0], real_image.shape()[1], s / 2,
                           s / 2});
        for (std::size_t i = 0; i < quad.shape()[0]; ++i)
            for (std::size_t c = 0; c < quad.shape()[1]; ++c)
                for (std::size_t y = 0; y < s / 2; ++y)
                    for (std::size_t x = 0; x < s / 2; ++x)
                        quad.at(i, c, y, x) =
                            real_image.at(i, c, h0 + y, w0 + x);
        TensorF target_part = bilinear_resize(quad, 64, 64);
        return ssl_reconstruction_loss(dec_full, make_leaf(target_full),
                                       dec_part, make_leaf(target_part));
    }

    void save_optimizer(const std::string& dir, const std::string& tag,
                        Adam<float>& opt) {
        std::vector<std::pair<std::string, const Tensor<float>*>> tensors;
        const auto& params = opt.params();
        for (std::size_t i = 0; i < params.size(); ++i) {
            tensors.emplace_back(tag + ".m." + params[i].first,
                                 &opt.first_moments()[i]);
            tensors.emplace_back(tag + ".v." + params[i].first,
                                 &opt.second_moments()[i]);
        }
        // each optimizer gets its own subdirectory so manifests stay strict
        save_tensors(dir + "/" + tag, tensors);
    }

    void load_optimizer(const std::string& dir, const std::string& tag,
                        Adam<float>& opt) {
        std::vector<std::pair<std::string, Tensor<float>*>> tensors;
        const auto& params = opt.params();
        for (std::size_t i = 0; i < params.size(); ++i) {
            tensors.emplace_back(tag + ".m." + params[i].first,
                                 &opt.first_moments()[i]);
            tensors.emplace_back(tag + ".v." + params[i].first,
                                 &opt.second_moments()[i]);
        }
        load_tensors(dir + "/" + tag, tensors);
    }

    void save_pool(const std::string& path, const ImagePool<float>& pool) {
        std::vector<float> flat;
        for (const auto& img : pool.contents())
            flat.insert(flat.end(), img.begin(), img.end());
        ckpt_detail::write_blob(path, flat.data(), flat.size());
    }

    void load_pool(const std::string& path, std::size_t count,
                   ImagePool<float>& pool) {
        const std::size_t chw = 3 * cfg_.image_size * cfg_.image_size;
        std::vector<float> flat(count * chw);
        if (count > 0) ckpt_detail::read_blob(path, flat.data(), flat.size());
        std::vector<std::vector<float>> contents(count);
        for (std::size_t i = 0; i < count; ++i)
            contents[i].assign(flat.begin() + i * chw,
                               flat.begin() + (i + 1) * chw);
        pool.restore(std::move(contents));
    }

    void check_config_match(const nlohmann::json& saved) const {
        nlohmann::json mine = cfg_.to_json();
        for (const char* key :
             {"data_root", "image_size", "epochs", "batch_size", "lr", "beta1",
              "beta2", "lambda_cyc", "lambda_id", "ssl", "ssl_weight",
              "diffaug", "pool_size", "seed"}) {
            SCGAN_CHECK(saved.contains(key) && saved.at(key) == mine.at(key),
                        ConfigError, "checkpoint was trained with ", key, " = ",
                        saved.value(key, nlohmann::json()).dump(),
                        ", current config says ", mine.at(key).dump(),
                        "; refusing to resume");
        }
    }

    // Fixed translation panel: up to 4 test images per domain, each row
    // [input, translated, cycled].
    void write_sample_grid(const UnpairedDataset<float>& data,
                           const std::string& dir, std::size_t epoch) {
        namespace fs = std::filesystem;
        const DomainData<float>& src_a =
            data.test_a.count() ? data.test_a : data.train_a;
        const DomainData<float>& src_b =
            data.test_b.count() ? data.test_b : data.train_b;
        const std::size_t ka = std::min<std::size_t>(4, src_a.count());
        const std::size_t kb = std::min<std::size_t>(4, src_b.count());
        if (ka + kb == 0) return;
        const std::size_t s = cfg_.image_size;
        ImageU8 grid;
        grid.height = (ka + kb) * s;
        grid.width = 3 * s;
        grid.rgb.assign(3 * grid.height * grid.width, 0);

        NoGradGuard no_grad;
        auto blit = [&](const TensorF& img, std::size_t row, std::size_t col) {
            ImageU8 px = from_unit_range(img);
            for (std::size_t y = 0; y < s; ++y)
                for (std::size_t x = 0; x < s; ++x)
                    for (std::size_t c = 0; c < 3; ++c)
                        grid.rgb[((row * s + y) * grid.width + col * s + x) *
                                     3 +
                                 c] = px.rgb[(y * s + x) * 3 + c];
        };
        auto run = [&](const TensorF& img, Generator<float>& fwd,
                       Generator<float>& back, std::size_t row) {
            TensorF batch(Shape{1, 3, s, s});
            std::copy_n(img.data(), img.numel(), batch.data());
            VarF x = make_leaf(batch);
            VarF t = fwd(x);
            VarF c = back(t);
            blit(img, row, 0);
            blit(slice_image(t->value, 0), row, 1);
            blit(slice_image(c->value, 0), row, 2);
        };
        for (std::size_t i = 0; i < ka; ++i)
            run(src_a.images[i], model_.gen_ab, model_.gen_ba, i);
        for (std::size_t i = 0; i < kb; ++i)
            run(src_b.images[i], model_.gen_ba, model_.gen_ab, ka + i);

        fs::create_directories(dir);
        char name[32];
        std::snprintf(name, sizeof(name), "epoch_%04zu.png", epoch);
        write_png(dir + "/" + std::string(name), grid);
    }

    TrainConfig cfg_;
    DiffAugPolicy policy_;
    TranslationModel<float> model_;
    Adam<float> opt_gen_, opt_disc_;
    ImagePool<float> pool_a_, pool_b_;
    TrainState state_;
};

} // namespace scgan

#endif
