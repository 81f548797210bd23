#include "hainav/ego/model.hpp"

#include <cmath>
#include <stdexcept>

namespace hainav::ego {

using namespace hainav::nn;

EgoConfig EgoConfig::tiny() {
  EgoConfig c;
  c.image_size = 16;
  c.h_dim = 5;
  c.s_dim = 3;
  c.enc_channels = {2, 2, 3};
  c.post_hidden = 6;
  c.dec_hidden = 5;
  c.dec_channels = {2, 2};
  c.col_hidden = {4, 3};
  return c;
}

EgoModel::EgoModel(EgoConfig cfg, uint64_t init_seed) : cfg_(std::move(cfg)) {
  Rng rng(init_seed);
  const int S = cfg_.image_size;
  const int sp = cfg_.enc_spatial();
  const auto& ec = cfg_.enc_channels;

  // Prior: LSTM over concat(s, a), then a 2*s head.
  const int lstm_in = cfg_.s_dim + cfg_.action_dim;
  params_.create("prior.lstm.w", {4 * cfg_.h_dim, lstm_in + cfg_.h_dim},
                 init_scale(lstm_in + cfg_.h_dim), rng);
  {
    auto b = params_.create_zeros("prior.lstm.b", {4 * cfg_.h_dim});
    for (int i = cfg_.h_dim; i < 2 * cfg_.h_dim; ++i) b->val[i] = 1.0;  // forget-gate bias
  }
  params_.create("prior.head.w", {2 * cfg_.s_dim, cfg_.h_dim}, init_scale(cfg_.h_dim), rng);
  params_.create_zeros("prior.head.b", {2 * cfg_.s_dim});

  // Posterior: stride-2 conv stack on the image, then two linear layers.
  params_.create("post.conv1.w", {ec[0], cfg_.channels * 9}, init_scale(cfg_.channels * 9), rng);
  params_.create_zeros("post.conv1.b", {ec[0]});
  params_.create("post.conv2.w", {ec[1], ec[0] * 9}, init_scale(ec[0] * 9), rng);
  params_.create_zeros("post.conv2.b", {ec[1]});
  params_.create("post.conv3.w", {ec[2], ec[1] * 9}, init_scale(ec[1] * 9), rng);
  params_.create_zeros("post.conv3.b", {ec[2]});
  const int feat = ec[2] * sp * sp;
  const int post_in = feat + cfg_.h_dim + cfg_.action_dim;
  params_.create("post.fc1.w", {cfg_.post_hidden, post_in}, init_scale(post_in), rng);
  params_.create_zeros("post.fc1.b", {cfg_.post_hidden});
  params_.create("post.fc2.w", {2 * cfg_.s_dim, cfg_.post_hidden}, init_scale(cfg_.post_hidden),
                 rng);
  params_.create_zeros("post.fc2.b", {2 * cfg_.s_dim});

  // Image likelihood: two linears up to a base feature map, then three
  // upsample+conv stages back to image resolution.
  const int base_ch = ec[2];
  params_.create("dec.fc1.w", {cfg_.dec_hidden, cfg_.s_dim}, init_scale(cfg_.s_dim), rng);
  params_.create_zeros("dec.fc1.b", {cfg_.dec_hidden});
  params_.create("dec.fc2.w", {base_ch * sp * sp, cfg_.dec_hidden}, init_scale(cfg_.dec_hidden),
                 rng);
  params_.create_zeros("dec.fc2.b", {base_ch * sp * sp});
  params_.create("dec.conv1.w", {cfg_.dec_channels[0], base_ch * 9}, init_scale(base_ch * 9), rng);
  params_.create_zeros("dec.conv1.b", {cfg_.dec_channels[0]});
  params_.create("dec.conv2.w", {cfg_.dec_channels[1], cfg_.dec_channels[0] * 9},
                 init_scale(cfg_.dec_channels[0] * 9), rng);
  params_.create_zeros("dec.conv2.b", {cfg_.dec_channels[1]});
  params_.create("dec.conv3.w", {cfg_.channels, cfg_.dec_channels[1] * 9},
                 init_scale(cfg_.dec_channels[1] * 9), rng);
  params_.create_zeros("dec.conv3.b", {cfg_.channels});

  // Collision likelihood from the latent sample.
  params_.create("col.fc1.w", {cfg_.col_hidden[0], cfg_.s_dim}, init_scale(cfg_.s_dim), rng);
  params_.create_zeros("col.fc1.b", {cfg_.col_hidden[0]});
  params_.create("col.fc2.w", {cfg_.col_hidden[1], cfg_.col_hidden[0]},
                 init_scale(cfg_.col_hidden[0]), rng);
  params_.create_zeros("col.fc2.b", {cfg_.col_hidden[1]});
  params_.create("col.fc3.w", {1, cfg_.col_hidden[1]}, init_scale(cfg_.col_hidden[1]), rng);
  params_.create_zeros("col.fc3.b", {1});

  (void)S;
}

Vec EgoModel::action_onehot(sim::Action a, int dim) {
  Vec v(static_cast<size_t>(dim), 0.0);
  v[static_cast<int>(a)] = 1.0;
  return v;
}

EgoModel::PriorOut EgoModel::prior_step_t(const Tensor& h, const Tensor& c,
                                          const Tensor& s_sample, const Tensor& action) const {
  const int H = cfg_.h_dim;
  Tensor xh = concat({s_sample, action, h});
  Tensor gates = linear(xh, params_.get("prior.lstm.w"), params_.get("prior.lstm.b"));
  Tensor i = sigmoid(slice(gates, 0, H));
  Tensor f = sigmoid(slice(gates, H, H));
  Tensor g = tanh_(slice(gates, 2 * H, H));
  Tensor o = sigmoid(slice(gates, 3 * H, H));
  Tensor c2 = add(mul(f, c), mul(i, g));
  Tensor h2 = mul(o, tanh_(c2));
  Tensor raw = linear(h2, params_.get("prior.head.w"), params_.get("prior.head.b"));
  auto [mean, std] = gaussian_head(raw, cfg_.s_dim, cfg_.std_floor);
  return {h2, c2, mean, std};
}

Tensor EgoModel::encode_obs_t(const Tensor& obs) const {
  const int S = cfg_.image_size;
  Tensor x = reshape(obs, {cfg_.channels, S, S});
  x = leaky_relu(conv2d(x, params_.get("post.conv1.w"), params_.get("post.conv1.b"), 3, 2, 1));
  x = leaky_relu(conv2d(x, params_.get("post.conv2.w"), params_.get("post.conv2.b"), 3, 2, 1));
  x = leaky_relu(conv2d(x, params_.get("post.conv3.w"), params_.get("post.conv3.b"), 3, 2, 1));
  const int sp = cfg_.enc_spatial();
  return reshape(x, {cfg_.enc_channels[2] * sp * sp});
}

std::pair<Tensor, Tensor> EgoModel::posterior_t(const Tensor& h, const Tensor& action,
                                                const Tensor& obs) const {
  Tensor feat = encode_obs_t(obs);
  Tensor joint = concat({feat, h, action});
  Tensor hid = leaky_relu(linear(joint, params_.get("post.fc1.w"), params_.get("post.fc1.b")));
  Tensor raw = linear(hid, params_.get("post.fc2.w"), params_.get("post.fc2.b"));
  return gaussian_head(raw, cfg_.s_dim, cfg_.std_floor);
}

Tensor EgoModel::decode_image_t(const Tensor& s) const {
  const int sp = cfg_.enc_spatial();
  const int base_ch = cfg_.enc_channels[2];
  Tensor x = leaky_relu(linear(s, params_.get("dec.fc1.w"), params_.get("dec.fc1.b")));
  x = leaky_relu(linear(x, params_.get("dec.fc2.w"), params_.get("dec.fc2.b")));
  x = reshape(x, {base_ch, sp, sp});
  x = upsample_nearest(x, sp * 2, sp * 2);
  x = leaky_relu(conv2d(x, params_.get("dec.conv1.w"), params_.get("dec.conv1.b"), 3, 1, 1));
  x = upsample_nearest(x, sp * 4, sp * 4);
  x = leaky_relu(conv2d(x, params_.get("dec.conv2.w"), params_.get("dec.conv2.b"), 3, 1, 1));
  x = upsample_nearest(x, sp * 8, sp * 8);
  x = conv2d(x, params_.get("dec.conv3.w"), params_.get("dec.conv3.b"), 3, 1, 1);
  return sigmoid(reshape(x, {cfg_.image_pixels()}));
}

Tensor EgoModel::collision_logit_t(const Tensor& s) const {
  Tensor x = leaky_relu(linear(s, params_.get("col.fc1.w"), params_.get("col.fc1.b")));
  x = leaky_relu(linear(x, params_.get("col.fc2.w"), params_.get("col.fc2.b")));
  return linear(x, params_.get("col.fc3.w"), params_.get("col.fc3.b"));
}

LossParts EgoModel::loss_t(const EgoSequence& seq, Rng& eps_rng) const {
  const size_t T = seq.observations.size();
  if (seq.actions.size() != T || seq.collisions.size() != T)
    throw std::invalid_argument("ego loss: misaligned sequence");

  Tensor h = make_tensor(Vec(cfg_.h_dim, 0.0));
  Tensor c = make_tensor(Vec(cfg_.h_dim, 0.0));
  Tensor s = make_tensor(Vec(cfg_.s_dim, 0.0));

  LossParts parts;
  std::vector<Tensor> terms;
  terms.reserve(3 * T);
  for (size_t t = 0; t < T; ++t) {
    Tensor a = make_tensor(action_onehot(seq.actions[t], cfg_.action_dim));
    auto prior = prior_step_t(h, c, s, a);
    h = prior.h;
    c = prior.c;
    Tensor obs = make_tensor(Vec(seq.observations[t]));
    auto [post_mean, post_std] = posterior_t(h, a, obs);

    Tensor kl = gaussian_kl_t(post_mean, post_std, prior.mean, prior.std);
    Vec eps(cfg_.s_dim);
    for (double& e : eps) e = eps_rng.normal();
    s = reparam_sample(post_mean, post_std, eps);

    Tensor recon = decode_image_t(s);
    Tensor nll = mul_scalar(sum_sq_diff(recon, seq.observations[t]), 0.5);
    Tensor bce = mul_scalar(bce_with_logits(collision_logit_t(s), {seq.collisions[t]}),
                            cfg_.collision_weight);

    parts.kl += kl->val[0];
    parts.nll += nll->val[0];
    parts.bce += bce->val[0];
    terms.push_back(kl);
    terms.push_back(nll);
    terms.push_back(bce);
  }
  Tensor total = terms[0];
  for (size_t i = 1; i < terms.size(); ++i) total = add(total, terms[i]);
  parts.total = total;
  return parts;
}

// --- evaluation wrappers -------------------------------------------------------

EgoState EgoModel::initial_state() const {
  EgoState st;
  st.h.assign(cfg_.h_dim, 0.0);
  st.c.assign(cfg_.h_dim, 0.0);
  st.s.mean.assign(cfg_.s_dim, 0.0);
  st.s.std.assign(cfg_.s_dim, 1.0);
  st.s_sample.assign(cfg_.s_dim, 0.0);
  return st;
}

EgoState EgoModel::prior_step(const EgoState& state, sim::Action a, const Vec* eps) const {
  NoGradGuard ng;
  auto out = prior_step_t(make_tensor(Vec(state.h)), make_tensor(Vec(state.c)),
                          make_tensor(Vec(state.s_sample)),
                          make_tensor(action_onehot(a, cfg_.action_dim)));
  EgoState next;
  next.h = out.h->val;
  next.c = out.c->val;
  next.s = to_belief(out.mean, out.std);
  next.s_sample = next.s.mean;
  if (eps)
    for (int i = 0; i < cfg_.s_dim; ++i) next.s_sample[i] += next.s.std[i] * (*eps)[i];
  return next;
}

GaussianBelief EgoModel::posterior_update(const Vec& h, sim::Action a, const Vec& obs) const {
  NoGradGuard ng;
  auto [mean, std] = posterior_t(make_tensor(Vec(h)),
                                 make_tensor(action_onehot(a, cfg_.action_dim)),
                                 make_tensor(Vec(obs)));
  return to_belief(mean, std);
}

Decoded EgoModel::decode(const Vec& s_sample) const {
  NoGradGuard ng;
  Tensor s = make_tensor(Vec(s_sample));
  Decoded out;
  out.image = decode_image_t(s)->val;
  const double logit = collision_logit_t(s)->val[0];
  out.collision_prob = 1.0 / (1.0 + std::exp(-logit));
  return out;
}

std::vector<Decoded> EgoModel::imagine(const EgoState& state,
                                       const std::vector<sim::Action>& actions,
                                       Rng* sample_rng) const {
  std::vector<Decoded> out;
  out.reserve(actions.size());
  EgoState cur = state;
  for (sim::Action a : actions) {
    if (sample_rng) {
      Vec eps(cfg_.s_dim);
      for (double& e : eps) e = sample_rng->normal();
      cur = prior_step(cur, a, &eps);
    } else {
      cur = prior_step(cur, a);
    }
    out.push_back(decode(cur.s_sample));
  }
  return out;
}

EgoState EgoModel::observe(const EgoState& state, sim::Action a, const Vec& obs) const {
  EgoState next = prior_step(state, a);
  next.s = posterior_update(next.h, a, obs);
  next.s_sample = next.s.mean;
  return next;
}

}  // namespace hainav::ego
