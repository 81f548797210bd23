#pragma once

#include <string>
#include <vector>

#include "hainav/allo/model.hpp"
#include "hainav/ego/model.hpp"
#include "hainav/harness/dataset.hpp"

namespace hainav::harness {

struct TrainOptions {
  int steps = 1000;
  int batch = 8;
  double lr = 3e-4;
  uint64_t seed = 0;
  int workers = 2;
  int log_every = 25;
  int checkpoint_every = 400;
  std::string out_checkpoint;
  std::string curve_csv;
  std::string meta_json = "{}";
  bool quiet = false;
};

// Adam on the summed free-energy loss, gradients accumulated across worker
// replicas sample-by-sample; deterministic in (seed, data).
void train_ego_model(ego::EgoModel& model, const std::vector<std::string>& dataset_files,
                     const TrainOptions& opts);

struct AlloCalibration {
  double reset_threshold = 0.05;  // 99th percentile within-room error
  double median_mse = 0.01;       // median within-room visible MSE
  int val_rooms = 0;
};
std::string calibration_to_json(const AlloCalibration& c);
AlloCalibration calibration_from_json(const std::string& text);

// Trains on all but the validation share of rooms, then calibrates the
// transition threshold and the recognition likelihood floor on the held-out set.
AlloCalibration train_allo_model(allo::AlloModel& model,
                                 const std::vector<std::string>& dataset_files,
                                 const TrainOptions& opts, double val_fraction);

// Splits episodes into fixed-length egocentric subsequences.
std::vector<ego::EgoSequence> ego_subsequences(const Dataset& data, int subseq_len);
allo::AlloSequence to_allo_sequence(const Episode& ep);

AlloCalibration calibrate_allo(const allo::AlloModel& model,
                               const std::vector<allo::AlloSequence>& val_rooms, int prefix_len);

}  // namespace hainav::harness
