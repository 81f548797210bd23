#include "hainav/harness/trainer.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <stdexcept>

#include <json.hpp>

#include "hainav/core/parallel.hpp"
#include "hainav/nn/checkpoint.hpp"

namespace hainav::harness {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::vector<size_t> epoch_order(size_t n, Rng& rng) {
  std::vector<size_t> idx(n);
  for (size_t i = 0; i < n; ++i) idx[i] = i;
  std::shuffle(idx.begin(), idx.end(), rng.raw());
  return idx;
}

}  // namespace

std::vector<ego::EgoSequence> ego_subsequences(const Dataset& data, int subseq_len) {
  std::vector<ego::EgoSequence> out;
  for (const Episode& ep : data.episodes) {
    for (size_t t0 = 0; t0 + subseq_len <= ep.steps.size(); t0 += subseq_len) {
      ego::EgoSequence seq;
      for (int t = 0; t < subseq_len; ++t) {
        const EpisodeStep& s = ep.steps[t0 + t];
        seq.observations.push_back(dequantize(s.obs));
        seq.actions.push_back(static_cast<sim::Action>(s.action));
        seq.collisions.push_back(s.collision ? 1.0 : 0.0);
      }
      out.push_back(std::move(seq));
    }
  }
  return out;
}

allo::AlloSequence to_allo_sequence(const Episode& ep) {
  allo::AlloSequence seq;
  for (const EpisodeStep& s : ep.steps) {
    allo::AlloStep step;
    step.obs = dequantize(s.obs);
    step.pixmask.assign(sim::kImagePixels, 0);
    std::array<bool, 49> mask{};
    for (int i = 0; i < 49; ++i) mask[i] = s.mask[i] != 0;
    step.pixmask = allo::pixel_mask(mask);
    step.pose = allo::LocalPose{s.local_x, s.local_y, static_cast<sim::Heading>(s.local_h)};
    seq.push_back(std::move(step));
  }
  return seq;
}

void train_ego_model(ego::EgoModel& model, const std::vector<std::string>& dataset_files,
                     const TrainOptions& opts) {
  std::vector<ego::EgoSequence> sequences;
  for (const std::string& path : dataset_files) {
    const Dataset data = read_dataset(path);
    if (data.kind != "ego") throw std::runtime_error("train-ego: wrong dataset kind in " + path);
    auto part = ego_subsequences(data, 20);
    std::move(part.begin(), part.end(), std::back_inserter(sequences));
  }
  if (sequences.empty()) throw std::runtime_error("train-ego: no sequences");

  const int workers = std::max(1, opts.workers);
  std::vector<ego::EgoModel> replicas;
  for (int w = 0; w < workers; ++w) replicas.emplace_back(model.config(), 1 + w);

  nn::Adam opt(model.params().all(), opts.lr);
  std::ofstream curve(opts.curve_csv);
  curve << "step,kl,nll,collision_bce,loss,sec_per_step\n";

  Rng shuffle_rng(mix_seed(opts.seed, 0xE60));
  std::vector<size_t> order = epoch_order(sequences.size(), shuffle_rng);
  size_t cursor = 0;
  const auto t0 = Clock::now();

  for (int step = 0; step < opts.steps; ++step) {
    std::vector<size_t> batch;
    for (int b = 0; b < opts.batch; ++b) {
      if (cursor >= order.size()) {
        order = epoch_order(sequences.size(), shuffle_rng);
        cursor = 0;
      }
      batch.push_back(order[cursor++]);
    }

    struct WorkerStats {
      double kl = 0, nll = 0, bce = 0;
    };
    std::vector<WorkerStats> stats(workers);
    parallel_for(workers, workers, [&](int w) {
      replicas[w].params().copy_values_from(model.params());
      replicas[w].params().zero_grads();
      for (size_t k = w; k < batch.size(); k += workers) {
        Rng eps(mix_seed(opts.seed, static_cast<uint64_t>(step), batch[k]));
        auto parts = replicas[w].loss_t(sequences[batch[k]], eps);
        if (!std::isfinite(parts.total->val[0]))
          throw std::runtime_error("train-ego: non-finite loss at step " +
                                   std::to_string(step) + " (kl=" + std::to_string(parts.kl) +
                                   " nll=" + std::to_string(parts.nll) + ")");
        nn::backward(parts.total);
        stats[w].kl += parts.kl;
        stats[w].nll += parts.nll;
        stats[w].bce += parts.bce;
      }
    });

    model.params().zero_grads();
    for (int w = 0; w < workers; ++w) model.params().accumulate_grads_from(replicas[w].params());
    const double scale = 1.0 / opts.batch;
    for (auto& p : model.params().all())
      for (double& g : p->ensure_grad()) g *= scale;
    opt.step();

    if (step % opts.log_every == 0 || step + 1 == opts.steps) {
      double kl = 0, nll = 0, bce = 0;
      for (const auto& s : stats) {
        kl += s.kl;
        nll += s.nll;
        bce += s.bce;
      }
      kl /= opts.batch;
      nll /= opts.batch;
      bce /= opts.batch;
      const double sec = seconds_since(t0) / (step + 1);
      curve << step << ',' << kl << ',' << nll << ',' << bce << ',' << kl + nll + bce << ','
            << sec << '\n';
      curve.flush();
      if (!opts.quiet)
        std::printf("[ego %d/%d] kl=%.2f nll=%.1f bce=%.3f (%.2fs/step)\n", step, opts.steps, kl,
                    nll, bce, sec);
    }
    if (!opts.out_checkpoint.empty() &&
        (step + 1) % opts.checkpoint_every == 0)
      nn::save_checkpoint(opts.out_checkpoint, "ego", model.params(), opts.meta_json);
  }
  if (!opts.out_checkpoint.empty())
    nn::save_checkpoint(opts.out_checkpoint, "ego", model.params(), opts.meta_json);
}

std::string calibration_to_json(const AlloCalibration& c) {
  nlohmann::json j;
  j["reset_threshold"] = c.reset_threshold;
  j["median_mse"] = c.median_mse;
  j["val_rooms"] = c.val_rooms;
  return j.dump(2);
}

AlloCalibration calibration_from_json(const std::string& text) {
  const auto j = nlohmann::json::parse(text);
  AlloCalibration c;
  c.reset_threshold = j.at("reset_threshold").get<double>();
  c.median_mse = j.at("median_mse").get<double>();
  c.val_rooms = j.value("val_rooms", 0);
  return c;
}

AlloCalibration calibrate_allo(const allo::AlloModel& model,
                               const std::vector<allo::AlloSequence>& val_rooms,
                               int prefix_len) {
  std::vector<double> errors;
  for (const allo::AlloSequence& seq : val_rooms) {
    const int prefix = std::min<int>(prefix_len, static_cast<int>(seq.size()));
    std::vector<GaussianBelief> beliefs;
    for (int t = 0; t < prefix; ++t) beliefs.push_back(model.encode(seq[t].obs, seq[t].pose));
    const GaussianBelief z = fuse(beliefs);
    for (size_t t = prefix; t < seq.size(); ++t)
      errors.push_back(model.prediction_error(z, seq[t].obs, seq[t].pixmask, seq[t].pose));
  }
  if (errors.empty()) throw std::runtime_error("calibrate: no validation errors");
  std::sort(errors.begin(), errors.end());
  AlloCalibration c;
  c.median_mse = errors[errors.size() / 2];
  c.reset_threshold = errors[static_cast<size_t>(0.99 * (errors.size() - 1))];
  c.val_rooms = static_cast<int>(val_rooms.size());
  return c;
}

AlloCalibration train_allo_model(allo::AlloModel& model,
                                 const std::vector<std::string>& dataset_files,
                                 const TrainOptions& opts, double val_fraction) {
  std::vector<allo::AlloSequence> rooms;
  for (const std::string& path : dataset_files) {
    const Dataset data = read_dataset(path);
    if (data.kind != "allo")
      throw std::runtime_error("train-allo: wrong dataset kind in " + path);
    for (const Episode& ep : data.episodes) rooms.push_back(to_allo_sequence(ep));
  }
  if (rooms.size() < 4) throw std::runtime_error("train-allo: not enough rooms");

  // Hold out the tail for calibration.
  const size_t n_val = std::max<size_t>(2, static_cast<size_t>(rooms.size() * val_fraction));
  std::vector<allo::AlloSequence> val(rooms.end() - n_val, rooms.end());
  rooms.resize(rooms.size() - n_val);

  const int workers = std::max(1, opts.workers);
  std::vector<allo::AlloModel> replicas;
  for (int w = 0; w < workers; ++w) replicas.emplace_back(model.config(), 7 + w);

  nn::Adam opt(model.params().all(), opts.lr);
  std::ofstream curve(opts.curve_csv);
  curve << "step,kl,recon,loss,sec_per_step\n";

  Rng shuffle_rng(mix_seed(opts.seed, 0xA110));
  std::vector<size_t> order = epoch_order(rooms.size(), shuffle_rng);
  size_t cursor = 0;
  const auto t0 = Clock::now();

  for (int step = 0; step < opts.steps; ++step) {
    std::vector<size_t> batch;
    std::vector<int> prefixes;
    for (int b = 0; b < opts.batch; ++b) {
      if (cursor >= order.size()) {
        order = epoch_order(rooms.size(), shuffle_rng);
        cursor = 0;
      }
      batch.push_back(order[cursor++]);
      // Posterior prefix between 15 observations and the whole sequence.
      Rng prng(mix_seed(opts.seed, 0x3333, static_cast<uint64_t>(step) * 64 + b));
      const int len = static_cast<int>(rooms[batch.back()].size());
      const int lo = std::min(15, len);
      prefixes.push_back(lo + prng.uniform_int(std::max(1, len - lo + 1)));
    }

    struct WorkerStats {
      double kl = 0, recon = 0;
    };
    std::vector<WorkerStats> stats(workers);
    parallel_for(workers, workers, [&](int w) {
      replicas[w].params().copy_values_from(model.params());
      replicas[w].params().zero_grads();
      for (size_t k = w; k < batch.size(); k += workers) {
        Rng eps(mix_seed(opts.seed, static_cast<uint64_t>(step), batch[k]));
        auto parts = replicas[w].loss_t(rooms[batch[k]], prefixes[k], eps);
        if (!std::isfinite(parts.total->val[0]))
          throw std::runtime_error("train-allo: non-finite loss at step " +
                                   std::to_string(step));
        nn::backward(parts.total);
        stats[w].kl += parts.kl;
        stats[w].recon += parts.recon;
      }
    });

    model.params().zero_grads();
    for (int w = 0; w < workers; ++w) model.params().accumulate_grads_from(replicas[w].params());
    const double scale = 1.0 / opts.batch;
    for (auto& p : model.params().all())
      for (double& g : p->ensure_grad()) g *= scale;
    opt.step();

    if (step % opts.log_every == 0 || step + 1 == opts.steps) {
      double kl = 0, recon = 0;
      for (const auto& s : stats) {
        kl += s.kl;
        recon += s.recon;
      }
      kl /= opts.batch;
      recon /= opts.batch;
      const double sec = seconds_since(t0) / (step + 1);
      curve << step << ',' << kl << ',' << recon << ',' << kl + recon << ',' << sec << '\n';
      curve.flush();
      if (!opts.quiet)
        std::printf("[allo %d/%d] kl=%.2f recon=%.1f (%.2fs/step)\n", step, opts.steps, kl, recon,
                    sec);
    }
    if (!opts.out_checkpoint.empty() && (step + 1) % opts.checkpoint_every == 0)
      nn::save_checkpoint(opts.out_checkpoint, "allo", model.params(), opts.meta_json);
  }

  const AlloCalibration calib = calibrate_allo(model, val, 15);
  if (!opts.out_checkpoint.empty())
    nn::save_checkpoint(opts.out_checkpoint, "allo", model.params(), calibration_to_json(calib));
  return calib;
}

}  // namespace hainav::harness
