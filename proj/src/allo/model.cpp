#include "hainav/allo/model.hpp"

#include <cmath>
#include <stdexcept>

namespace hainav::allo {

using namespace hainav::nn;

AlloConfig AlloConfig::tiny() {
  AlloConfig c;
  c.image_size = 16;
  c.z_dim = 3;
  c.pose_embed_dim = 3;
  c.enc_channels = {2, 3, 3, 4};
  c.dec_base_channels = 4;
  c.dec_base_hw = 2;
  c.dec_channels = {4, 3, 2};
  return c;
}

std::vector<uint8_t> pixel_mask(const std::array<bool, sim::kWindowTiles * sim::kWindowTiles>& m) {
  std::vector<uint8_t> out(sim::kImagePixels, 0);
  for (int wr = 0; wr < sim::kWindowTiles; ++wr)
    for (int wc = 0; wc < sim::kWindowTiles; ++wc) {
      if (!m[wr * sim::kWindowTiles + wc]) continue;
      for (int c = 0; c < sim::kChannels; ++c)
        for (int py = 0; py < sim::kTilePixels; ++py) {
          uint8_t* row = &out[(static_cast<size_t>(c) * sim::kImageSize +
                               wr * sim::kTilePixels + py) *
                                  sim::kImageSize +
                              wc * sim::kTilePixels];
          std::fill(row, row + sim::kTilePixels, uint8_t{1});
        }
    }
  return out;
}

AlloModel::AlloModel(AlloConfig cfg, uint64_t init_seed) : cfg_(std::move(cfg)) {
  Rng rng(init_seed);
  const auto& ec = cfg_.enc_channels;

  params_.create("pose.fc.w", {cfg_.pose_embed_dim, 4}, init_scale(4), rng);
  params_.create_zeros("pose.fc.b", {cfg_.pose_embed_dim});

  params_.create("enc.conv1.w", {ec[0], cfg_.channels * 1}, init_scale(cfg_.channels), rng);
  params_.create_zeros("enc.conv1.b", {ec[0]});
  params_.create("enc.conv2.w", {ec[1], ec[0] * 9}, init_scale(ec[0] * 9), rng);
  params_.create_zeros("enc.conv2.b", {ec[1]});
  params_.create("enc.conv3.w", {ec[2], ec[1] * 9}, init_scale(ec[1] * 9), rng);
  params_.create_zeros("enc.conv3.b", {ec[2]});
  params_.create("enc.conv4.w", {ec[3], ec[2] * 9}, init_scale(ec[2] * 9), rng);
  params_.create_zeros("enc.conv4.b", {ec[3]});

  const int sp = cfg_.enc_spatial();
  const int enc_in = ec[3] * sp * sp + cfg_.pose_embed_dim;
  params_.create("enc.head.w", {2 * cfg_.z_dim, enc_in}, init_scale(enc_in), rng);
  params_.create_zeros("enc.head.b", {2 * cfg_.z_dim});

  const int dec_in = cfg_.z_dim + cfg_.pose_embed_dim;
  const int base = cfg_.dec_base_channels * cfg_.dec_base_hw * cfg_.dec_base_hw;
  params_.create("dec.fc.w", {base, dec_in}, init_scale(dec_in), rng);
  params_.create_zeros("dec.fc.b", {base});
  params_.create("dec.conv1.w", {cfg_.dec_channels[0], cfg_.dec_base_channels * 9},
                 init_scale(cfg_.dec_base_channels * 9), rng);
  params_.create_zeros("dec.conv1.b", {cfg_.dec_channels[0]});
  params_.create("dec.conv2.w", {cfg_.dec_channels[1], cfg_.dec_channels[0] * 9},
                 init_scale(cfg_.dec_channels[0] * 9), rng);
  params_.create_zeros("dec.conv2.b", {cfg_.dec_channels[1]});
  params_.create("dec.conv3.w", {cfg_.dec_channels[2], cfg_.dec_channels[1] * 9},
                 init_scale(cfg_.dec_channels[1] * 9), rng);
  params_.create_zeros("dec.conv3.b", {cfg_.dec_channels[2]});
  params_.create("dec.conv4.w", {cfg_.channels, cfg_.dec_channels[2] * 9},
                 init_scale(cfg_.dec_channels[2] * 9), rng);
  params_.create_zeros("dec.conv4.b", {cfg_.channels});
}

Vec AlloModel::pose_features(const LocalPose& pose) const {
  const double angle = static_cast<int>(pose.heading) * M_PI_2;
  return {pose.x / cfg_.pose_span, pose.y / cfg_.pose_span, std::cos(angle), std::sin(angle)};
}

Tensor AlloModel::pose_embed_t(const LocalPose& pose) const {
  Tensor in = make_tensor(pose_features(pose));
  return leaky_relu(linear(in, params_.get("pose.fc.w"), params_.get("pose.fc.b")));
}

std::pair<Tensor, Tensor> AlloModel::encode_t(const Tensor& obs, const LocalPose& pose) const {
  const int S = cfg_.image_size;
  Tensor x = reshape(obs, {cfg_.channels, S, S});
  x = leaky_relu(conv2d(x, params_.get("enc.conv1.w"), params_.get("enc.conv1.b"), 1, 1, 0));
  x = leaky_relu(conv2d(x, params_.get("enc.conv2.w"), params_.get("enc.conv2.b"), 3, 2, 1));
  x = leaky_relu(conv2d(x, params_.get("enc.conv3.w"), params_.get("enc.conv3.b"), 3, 2, 1));
  x = leaky_relu(conv2d(x, params_.get("enc.conv4.w"), params_.get("enc.conv4.b"), 3, 2, 1));
  const int sp = cfg_.enc_spatial();
  Tensor feat = reshape(x, {cfg_.enc_channels[3] * sp * sp});
  Tensor joint = concat({feat, pose_embed_t(pose)});
  Tensor raw = linear(joint, params_.get("enc.head.w"), params_.get("enc.head.b"));
  return gaussian_head(raw, cfg_.z_dim, cfg_.std_floor);
}

Tensor AlloModel::decode_t(const Tensor& z, const LocalPose& pose) const {
  const int S = cfg_.image_size;
  Tensor joint = concat({z, pose_embed_t(pose)});
  Tensor x = leaky_relu(linear(joint, params_.get("dec.fc.w"), params_.get("dec.fc.b")));
  x = reshape(x, {cfg_.dec_base_channels, cfg_.dec_base_hw, cfg_.dec_base_hw});
  x = upsample_nearest(x, S / 8, S / 8);
  x = leaky_relu(conv2d(x, params_.get("dec.conv1.w"), params_.get("dec.conv1.b"), 3, 1, 1));
  x = upsample_nearest(x, S / 4, S / 4);
  x = leaky_relu(conv2d(x, params_.get("dec.conv2.w"), params_.get("dec.conv2.b"), 3, 1, 1));
  x = upsample_nearest(x, S / 2, S / 2);
  x = leaky_relu(conv2d(x, params_.get("dec.conv3.w"), params_.get("dec.conv3.b"), 3, 1, 1));
  x = upsample_nearest(x, S, S);
  x = conv2d(x, params_.get("dec.conv4.w"), params_.get("dec.conv4.b"), 3, 1, 1);
  return sigmoid(reshape(x, {cfg_.image_pixels()}));
}

LossParts AlloModel::loss_t(const AlloSequence& seq, int prefix_len, Rng& eps_rng) const {
  const int T = static_cast<int>(seq.size());
  if (T == 0) throw std::invalid_argument("allo loss: empty sequence");
  prefix_len = std::min(prefix_len, T);

  std::vector<Tensor> means, stds, kls;
  for (const AlloStep& step : seq) {
    auto [mean, std] = encode_t(make_tensor(Vec(step.obs)), step.pose);
    means.push_back(mean);
    stds.push_back(std);
    Tensor unit_mean = make_tensor(Vec(cfg_.z_dim, 0.0));
    Tensor unit_std = make_tensor(Vec(cfg_.z_dim, 1.0));
    kls.push_back(gaussian_kl_t(mean, std, unit_mean, unit_std));
  }

  // Product of the first prefix_len posteriors.
  Tensor ones = make_tensor(Vec(cfg_.z_dim, 1.0));
  Tensor prec_sum, weighted_sum;
  for (int t = 0; t < prefix_len; ++t) {
    Tensor prec = div(ones, square(stds[t]));
    Tensor w = mul(prec, means[t]);
    prec_sum = t == 0 ? prec : add(prec_sum, prec);
    weighted_sum = t == 0 ? w : add(weighted_sum, w);
  }
  Tensor z_mean = div(weighted_sum, prec_sum);
  Tensor z_std = div(ones, sqrt_(prec_sum));
  Vec eps(cfg_.z_dim);
  for (double& e : eps) e = eps_rng.normal();
  Tensor z = reparam_sample(z_mean, z_std, eps);

  LossParts parts;
  std::vector<Tensor> terms;
  for (int t = 0; t < T; ++t) {
    Tensor recon = decode_t(z, seq[t].pose);
    Tensor err = sum_sq_diff_masked(recon, seq[t].obs, seq[t].pixmask);
    parts.recon += err->val[0];
    parts.kl += kls[t]->val[0];
    terms.push_back(err);
    terms.push_back(kls[t]);
  }
  Tensor total = terms[0];
  for (size_t i = 1; i < terms.size(); ++i) total = add(total, terms[i]);
  parts.total = total;
  return parts;
}

GaussianBelief AlloModel::encode(const Vec& obs, const LocalPose& pose) const {
  NoGradGuard ng;
  auto [mean, std] = encode_t(make_tensor(Vec(obs)), pose);
  return to_belief(mean, std);
}

Vec AlloModel::decode(const Vec& z_sample, const LocalPose& pose) const {
  NoGradGuard ng;
  return decode_t(make_tensor(Vec(z_sample)), pose)->val;
}

double AlloModel::prediction_error(const GaussianBelief& z, const Vec& obs,
                                   const std::vector<uint8_t>& pixmask,
                                   const LocalPose& pose) const {
  size_t visible = 0;
  for (uint8_t m : pixmask) visible += m;
  if (visible == 0) return 0.0;
  const Vec pred = decode(z.mean, pose);
  double err = 0.0;
  for (size_t i = 0; i < obs.size(); ++i) {
    if (!pixmask[i]) continue;
    const double d = pred[i] - obs[i];
    err += d * d;
  }
  return err / static_cast<double>(visible);
}

}  // namespace hainav::allo
