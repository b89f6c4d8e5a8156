#include "gpcc/model.hpp"

#include "gpcc/config_json.hpp"
#include "gpcc/error.hpp"
#include "gpcc/nn/checkpoint.hpp"

#include <algorithm>
#include <cmath>

namespace gpcc
{

void ModelConfig::validate() const
{
  if (d < 1) {
    throw ConfigError("model.d", "must be at least 1");
  }
  if (d_model < 1) {
    throw ConfigError("model.d_model", "must be at least 1");
  }
  if (heads < 1) {
    throw ConfigError("model.heads", "must be at least 1");
  }
  if (d_model % heads != 0) {
    throw ConfigError("model.heads", "d_model (" + std::to_string(d_model) + ") must be divisible by heads");
  }
  if (encoder_layers < 0) {
    throw ConfigError("model.encoder_layers", "must be non-negative");
  }
  if (decoder_layers < 0) {
    throw ConfigError("model.decoder_layers", "must be non-negative");
  }
  if (ffn_hidden < 1) {
    throw ConfigError("model.ffn_hidden", "must be at least 1");
  }
  if (k_gen < 1) {
    throw ConfigError("model.k_gen", "must be at least 1");
  }
}

void GpccConfig::validate() const
{
  window.validate();
  group.validate();
  conception.validate();
  model.validate();
}

GroupConfig GpccConfig::effective_group() const
{
  GroupConfig g = group;
  g.enabled = group.enabled && !model.disable_group;
  return g;
}

ConceptionConfig GpccConfig::effective_conception() const
{
  ConceptionConfig c = conception;
  c.enabled = conception.enabled && !model.disable_conception;
  return c;
}

GpccConfig apply_variant(GpccConfig cfg, Variant v)
{
  cfg.group.enabled = true;
  cfg.conception.enabled = true;
  cfg.model.disable_conception = v == Variant::V1 || v == Variant::V3;
  cfg.model.disable_group = v == Variant::V2 || v == Variant::V3;
  return cfg;
}

std::string_view to_string(Variant v)
{
  switch (v) {
    case Variant::V0:
      return "v0";
    case Variant::V1:
      return "v1";
    case Variant::V2:
      return "v2";
    case Variant::V3:
      return "v3";
  }
  return "?";
}

Track linear_fit_extrapolate(std::span<const Vec2> observed, const WindowConfig & cfg)
{
  const std::size_t n = observed.size();
  if (n < 2) {
    throw ShapeError("linear_fit_extrapolate: need at least 2 observed points");
  }
  // Step index t = 0..n-1 for the observed points; future steps continue at n, n+1, ...
  const double t_mean = static_cast<double>(n - 1) / 2.0;
  Vec2 mean{};
  for (const Vec2 & p : observed) {
    mean = mean + p;
  }
  mean = (1.0 / static_cast<double>(n)) * mean;
  double stt = 0.0;
  Vec2 sty{};
  for (std::size_t t = 0; t < n; ++t) {
    const double dt = static_cast<double>(t) - t_mean;
    stt += dt * dt;
    sty = sty + dt * (observed[t] - mean);
  }
  const Vec2 slope = (1.0 / stt) * sty;
  Track out;
  out.reserve(static_cast<std::size_t>(cfg.n_future));
  for (int f = 0; f < cfg.n_future; ++f) {
    const double dt = static_cast<double>(n + static_cast<std::size_t>(f)) - t_mean;
    out.push_back(mean + dt * slope);
  }
  return out;
}

namespace
{

bool track_less(const Track & a, const Track & b)
{
  return std::lexicographical_compare(
    a.begin(), a.end(), b.begin(), b.end(),
    [](const Vec2 & p, const Vec2 & q) { return p.x < q.x || (p.x == q.x && p.y < q.y); });
}

void check_instance(const PredictionInstance & inst, const WindowConfig & w)
{
  const auto n_p = static_cast<std::size_t>(w.n_past);
  if (inst.observed.size() != n_p) {
    throw ShapeError(
      "instance '" + inst.target_id + "': observed has " + std::to_string(inst.observed.size()) +
      " points, expected " + std::to_string(n_p));
  }
  for (const auto & nb : inst.neighbors) {
    if (nb.track.size() != n_p) {
      throw ShapeError("instance '" + inst.target_id + "': neighbor '" + nb.agent_id + "' has wrong length");
    }
  }
  if (inst.future_truth && inst.future_truth->size() != static_cast<std::size_t>(w.n_future)) {
    throw ShapeError("instance '" + inst.target_id + "': future has wrong length");
  }
}

}  // namespace

InstanceFeatures extract_features(const PredictionInstance & inst, const GpccConfig & cfg)
{
  check_instance(inst, cfg.window);
  InstanceFeatures f;
  f.normalized = normalize_instance(inst);
  f.groups = group_members(f.normalized, cfg.effective_group());
  f.conception = conception_vector(f.normalized, f.groups, cfg.effective_conception());
  for (const auto & nb : f.normalized.neighbors) {
    if (f.groups.contains(nb.agent_id)) {
      f.member_tracks.push_back(nb.track);
    }
  }
  std::sort(f.member_tracks.begin(), f.member_tracks.end(), track_less);
  f.linear_fit = linear_fit_extrapolate(f.normalized.observed, cfg.window);
  return f;
}

std::vector<InstanceFeatures> extract_features(std::span<const PredictionInstance> insts, const GpccConfig & cfg)
{
  std::vector<InstanceFeatures> out(insts.size());
  const auto n = static_cast<std::ptrdiff_t>(insts.size());
  std::exception_ptr failure;
#pragma omp parallel for schedule(dynamic, 8)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    try {
      out[static_cast<std::size_t>(i)] = extract_features(insts[static_cast<std::size_t>(i)], cfg);
    } catch (...) {
#pragma omp critical(gpcc_extract_failure)
      if (!failure) {
        failure = std::current_exception();
      }
    }
  }
  if (failure) {
    std::rethrow_exception(failure);
  }
  return out;
}

std::vector<InstanceFeatures> reference::extract_features(
  std::span<const PredictionInstance> insts, const GpccConfig & cfg)
{
  std::vector<InstanceFeatures> out;
  out.reserve(insts.size());
  for (const auto & inst : insts) {
    out.push_back(gpcc::extract_features(inst, cfg));
  }
  return out;
}

PreparedBatch assemble_batch(std::span<const InstanceFeatures * const> features, const GpccConfig & cfg)
{
  if (features.empty()) {
    throw ShapeError("assemble_batch: empty batch");
  }
  const auto n_p = static_cast<std::size_t>(cfg.window.n_past);
  const auto n_f = static_cast<std::size_t>(cfg.window.n_future);
  const std::size_t b = features.size();

  PreparedBatch batch;
  batch.size = b;
  batch.features.assign(features.begin(), features.end());
  batch.observed = nn::Tensor({b, n_p, 2});
  batch.conception = nn::Tensor({b, ConceptionVector::size});
  batch.linear_fit = nn::Tensor({b, 2 * n_f});

  std::size_t members = 0;
  bool all_truth = true;
  for (const InstanceFeatures * f : features) {
    members += f->member_tracks.size();
    all_truth = all_truth && f->normalized.future_truth.has_value();
  }
  batch.member_pairs = nn::Tensor({members, n_p, 4});
  batch.member_owner.reserve(members);
  if (all_truth) {
    batch.truth = nn::Tensor({b, 2 * n_f});
  }

  std::size_t m = 0;
  for (std::size_t i = 0; i < b; ++i) {
    const InstanceFeatures & f = *features[i];
    const Track & obs = f.normalized.observed;
    for (std::size_t t = 0; t < n_p; ++t) {
      batch.observed[(i * n_p + t) * 2] = obs[t].x;
      batch.observed[(i * n_p + t) * 2 + 1] = obs[t].y;
    }
    for (const Track & member : f.member_tracks) {
      for (std::size_t t = 0; t < n_p; ++t) {
        double * row = batch.member_pairs.data() + (m * n_p + t) * 4;
        row[0] = obs[t].x;
        row[1] = obs[t].y;
        row[2] = member[t].x;
        row[3] = member[t].y;
      }
      batch.member_owner.push_back(i);
      ++m;
    }
    for (std::size_t s = 0; s < ConceptionVector::size; ++s) {
      batch.conception[i * ConceptionVector::size + s] = f.conception.values[s];
    }
    for (std::size_t t = 0; t < n_f; ++t) {
      batch.linear_fit[i * 2 * n_f + 2 * t] = f.linear_fit[t].x;
      batch.linear_fit[i * 2 * n_f + 2 * t + 1] = f.linear_fit[t].y;
      if (batch.truth) {
        const Vec2 & y = (*f.normalized.future_truth)[t];
        (*batch.truth)[i * 2 * n_f + 2 * t] = y.x;
        (*batch.truth)[i * 2 * n_f + 2 * t + 1] = y.y;
      }
    }
  }
  return batch;
}

GpccModel::GpccModel(GpccConfig cfg, std::uint64_t seed)
: cfg_(std::move(cfg))
{
  cfg_.validate();
  Rng rng(seed);
  const auto d = static_cast<std::size_t>(cfg_.model.d);
  const auto dm = static_cast<std::size_t>(cfg_.model.d_model);
  const auto heads = static_cast<std::size_t>(cfg_.model.heads);
  const auto hidden = static_cast<std::size_t>(cfg_.model.ffn_hidden);
  const auto n_p = static_cast<std::size_t>(cfg_.window.n_past);
  const auto n_f = static_cast<std::size_t>(cfg_.window.n_future);
  const auto k = static_cast<std::size_t>(cfg_.model.k_gen);

  self_embedding_ = nn::TwoLayerEmbedding::create(store_, "self_embedding", 2, d, rng);
  group_embedding_ = nn::TwoLayerEmbedding::create(store_, "group_embedding", 4, d, rng);
  conception_embedding_ =
    nn::TwoLayerEmbedding::create(store_, "conception_embedding", ConceptionVector::size, 2 * d, rng);
  fusion_ = nn::Linear::create(store_, "fusion", 4 * d, dm, rng);
  auto make_block = [&](const std::string & name) {
    return Block{
      nn::MultiHeadAttention::create(store_, name + ".attention", dm, heads, rng),
      nn::LayerNorm::create(store_, name + ".attention_norm", dm),
      nn::FeedForward::create(store_, name + ".feed_forward", dm, hidden, rng),
      nn::LayerNorm::create(store_, name + ".feed_forward_norm", dm)};
  };
  for (int i = 0; i < cfg_.model.encoder_layers; ++i) {
    encoder_.push_back(make_block("encoder." + std::to_string(i)));
  }
  value_projection_ = nn::Linear::create(store_, "value_projection", 2 * n_f, n_p * dm, rng);
  for (int i = 0; i < cfg_.model.decoder_layers; ++i) {
    decoder_.push_back(make_block("decoder." + std::to_string(i)));
  }
  generator_ = nn::Linear::create(store_, "generator", n_p * dm, k * 2 * n_f, rng);
  positions_ = nn::sinusoidal_positions(n_p, dm);
}

namespace
{

nn::Var checked(nn::Var v, const char * stage)
{
  if (!v.value().all_finite()) {
    throw NumericError(std::string("non-finite value in layer '") + stage + "'");
  }
  return v;
}

}  // namespace

GpccModel::Graph GpccModel::build(nn::Tape & tape, const PreparedBatch & batch) const
{
  const std::size_t b = batch.size;
  const auto d = static_cast<std::size_t>(cfg_.model.d);
  const auto dm = static_cast<std::size_t>(cfg_.model.d_model);
  const auto n_p = static_cast<std::size_t>(cfg_.window.n_past);
  const auto n_f = static_cast<std::size_t>(cfg_.window.n_future);
  const auto k = static_cast<std::size_t>(cfg_.model.k_gen);
  if (batch.observed.shape() != nn::Shape{b, n_p, 2}) {
    throw ShapeError("batch does not match the model window");
  }

  Graph g;
  g.f_self = checked(self_embedding_(tape.constant(batch.observed)), "self_embedding");

  if (cfg_.effective_group().enabled && !batch.member_owner.empty()) {
    const nn::Var pairs = group_embedding_(tape.constant(batch.member_pairs));
    g.f_group = checked(nn::segment_mean(pairs, batch.member_owner, b), "group_embedding");
  } else {
    g.f_group = tape.constant(nn::Tensor({b, n_p, d}));
  }

  if (cfg_.effective_conception().enabled) {
    const nn::Var tiled = nn::repeat_rows(tape.constant(batch.conception), n_p);
    g.f_con = checked(conception_embedding_(tiled), "conception_embedding");
  } else {
    g.f_con = tape.constant(nn::Tensor({b, n_p, 2 * d}));
  }

  const nn::Var parts[] = {g.f_con, g.f_self, g.f_group};
  g.fused = checked(nn::tanh(fusion_(nn::concat_last(parts))), "fusion");

  nn::Tensor pos({b, n_p, dm});
  for (std::size_t i = 0; i < b; ++i) {
    std::copy(positions_.data(), positions_.data() + positions_.size(), pos.data() + i * n_p * dm);
  }
  nn::Var h = g.fused + tape.constant(std::move(pos));
  for (std::size_t l = 0; l < encoder_.size(); ++l) {
    const Block & blk = encoder_[l];
    h = blk.attention_norm(h + blk.attention(h, h, h));
    h = blk.feed_forward_norm(h + blk.feed_forward(h));
    checked(h, "encoder");
  }

  const nn::Var fit = tape.constant(batch.linear_fit);
  nn::Var dec = nn::reshape(value_projection_(fit), {b, n_p, dm});
  checked(dec, "value_projection");
  for (std::size_t l = 0; l < decoder_.size(); ++l) {
    const Block & blk = decoder_[l];
    dec = blk.attention_norm(dec + blk.attention(h, h, dec));
    dec = blk.feed_forward_norm(dec + blk.feed_forward(dec));
    checked(dec, "decoder");
  }

  const nn::Var heads = nn::reshape(generator_(nn::reshape(dec, {b, n_p * dm})), {b, k, 2 * n_f});
  g.candidates = checked(heads + nn::repeat_rows(fit, k), "generator");
  return g;
}

nn::Var GpccModel::loss(nn::Tape & tape, const PreparedBatch & batch) const
{
  if (!batch.truth) {
    throw ShapeError("loss: batch has instances without ground-truth future");
  }
  const Graph g = build(tape, batch);
  return nn::mean(nn::best_of_k_l2(g.candidates, *batch.truth));
}

namespace
{

nn::Tensor slice_instance(const nn::Tensor & t, std::size_t i)
{
  const std::size_t per = t.size() / t.dim(0);
  nn::Shape shape(t.shape().begin() + 1, t.shape().end());
  return nn::Tensor(
    std::move(shape), std::vector<double>(t.data() + i * per, t.data() + (i + 1) * per));
}

}  // namespace

std::vector<PredictionSet> GpccModel::predict(std::span<const InstanceFeatures> features) const
{
  std::vector<PredictionSet> out;
  if (features.empty()) {
    return out;
  }
  std::vector<const InstanceFeatures *> ptrs;
  ptrs.reserve(features.size());
  for (const auto & f : features) {
    ptrs.push_back(&f);
  }
  const PreparedBatch batch = assemble_batch(ptrs, cfg_);
  nn::Tape tape;
  const Graph g = build(tape, batch);

  const auto n_f = static_cast<std::size_t>(cfg_.window.n_future);
  const auto k = static_cast<std::size_t>(cfg_.model.k_gen);
  const nn::Tensor & cand = g.candidates.value();
  out.reserve(features.size());
  for (std::size_t i = 0; i < features.size(); ++i) {
    const InstanceFeatures & f = features[i];
    const Vec2 offset = f.normalized.origin_offset;
    PredictionSet set;
    set.target_id = f.normalized.target_id;
    set.trajectories.reserve(k);
    for (std::size_t c = 0; c < k; ++c) {
      Track t(n_f);
      for (std::size_t s = 0; s < n_f; ++s) {
        const double * p = cand.data() + ((i * k + c) * n_f + s) * 2;
        t[s] = Vec2{p[0], p[1]};
      }
      set.trajectories.push_back(to_scene_frame(t, offset));
    }
    set.linear_fit = to_scene_frame(f.linear_fit, offset);
    set.feature_bundle.f_self = slice_instance(g.f_self.value(), i);
    set.feature_bundle.f_group = slice_instance(g.f_group.value(), i);
    set.feature_bundle.f_con = slice_instance(g.f_con.value(), i);
    set.feature_bundle.fused = slice_instance(g.fused.value(), i);
    out.push_back(std::move(set));
  }
  return out;
}

std::vector<PredictionSet> GpccModel::predict(std::span<const PredictionInstance> instances) const
{
  const auto features = extract_features(instances, cfg_);
  return predict(std::span<const InstanceFeatures>(features));
}

PredictionSet GpccModel::forward(const PredictionInstance & inst) const
{
  return std::move(predict(std::span<const PredictionInstance>(&inst, 1)).front());
}

const nn::Tensor & GpccModel::fuse_weight() const { return fusion_.weight->value; }

const nn::Tensor & GpccModel::conception_input_weight() const { return conception_embedding_.hidden.weight->value; }

std::string GpccModel::config_text() const { return config_to_text(cfg_); }

std::uint64_t GpccModel::config_hash() const { return gpcc::config_hash(cfg_); }

void GpccModel::save(const std::filesystem::path & path) const
{
  nn::save_checkpoint(path, store_, config_text());
}

GpccModel GpccModel::load(const std::filesystem::path & path, const std::optional<GpccConfig> & expected)
{
  std::optional<std::uint64_t> hash;
  if (expected) {
    hash = gpcc::config_hash(*expected);
  }
  const nn::CheckpointData data = nn::load_checkpoint(path, hash);
  GpccConfig cfg;
  try {
    cfg = config_from_text(data.config_text);
  } catch (const ConfigError & e) {
    throw CheckpointError(std::string("checkpoint config block is invalid: ") + e.what());
  }
  GpccModel model(cfg, 0);
  nn::restore_parameters(model.store_, data);
  return model;
}

GpccModel GpccModel::clone() const
{
  GpccModel copy(cfg_, 0);
  const auto src = store_.all();
  const auto dst = copy.store_.all();
  for (std::size_t i = 0; i < src.size(); ++i) {
    dst[i]->value = src[i]->value;
    dst[i]->first_moment = src[i]->first_moment;
    dst[i]->second_moment = src[i]->second_moment;
    dst[i]->step = src[i]->step;
  }
  return copy;
}

std::string config_to_text(const GpccConfig & cfg)
{
  nlohmann::json j = cfg;
  return j.dump();
}

GpccConfig config_from_text(const std::string & text)
{
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error & e) {
    throw ConfigError("", std::string("invalid JSON: ") + e.what());
  }
  return gpcc_config_from_json(j, "");
}

std::uint64_t config_hash(const GpccConfig & cfg) { return nn::fnv1a64(config_to_text(cfg)); }

}  // namespace gpcc
