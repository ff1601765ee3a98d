#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "pitchrl/dmpo/learner.hpp"
#include "pitchrl/pipeline/config.hpp"
#include "pitchrl/pipeline/distill.hpp"
#include "pitchrl/pipeline/pool.hpp"

namespace pitchrl {

constexpr int kCheckpointSchemaVersion = 1;

inline std::uint64_t fnv1a64(const void* data, size_t n) {
  const auto* p = static_cast<const unsigned char*>(data);
  std::uint64_t h = 1469598103934665603ULL;
  for (size_t i = 0; i < n; ++i) {
    h ^= p[i];
    h *= 1099511628211ULL;
  }
  return h;
}

namespace ckpt_detail {

struct ArrayTable {
  nlohmann::json entries = nlohmann::json::array();
  Vec data;

  void add(const std::string& name, const Vec& v) {
    entries.push_back({{"name", name},
                       {"offset", data.size()},
                       {"count", v.size()}});
    data.insert(data.end(), v.begin(), v.end());
  }

  void add_params(const std::string& prefix, const MlpParams& p) {
    int idx = 0;
    p.visit([&](const Vec& a) { add(prefix + "/" + std::to_string(idx++), a); });
  }
};

inline void write_doubles(const std::string& path, const Vec& v) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("checkpoint: cannot write " + path);
  // little-endian doubles; this codebase targets little-endian hosts
  out.write(reinterpret_cast<const char*>(v.data()),
            static_cast<std::streamsize>(v.size() * sizeof(double)));
}

inline Vec read_doubles(const std::string& path) {
  std::ifstream in(path, std::ios::binary | std::ios::ate);
  if (!in) throw ConfigError("checkpoint: cannot read " + path);
  const std::streamsize bytes = in.tellg();
  in.seekg(0);
  Vec v(static_cast<size_t>(bytes) / sizeof(double));
  in.read(reinterpret_cast<char*>(v.data()), bytes);
  return v;
}

inline nlohmann::json spec_to_json(const MlpSpec& s) {
  return {{"input_dim", s.input_dim},
          {"hidden", s.hidden},
          {"output_dim", s.output_dim},
          {"first_layer_norm", s.first_layer_norm}};
}

inline MlpSpec spec_from_json(const nlohmann::json& j) {
  MlpSpec s;
  s.input_dim = j.at("input_dim").get<int>();
  s.hidden = j.at("hidden").get<std::vector<int>>();
  s.output_dim = j.at("output_dim").get<int>();
  s.first_layer_norm = j.at("first_layer_norm").get<bool>();
  return s;
}

inline nlohmann::json adam_scalar_to_json(const ScalarAdam& a) {
  return {{"m", a.m}, {"v", a.v}, {"step", a.step}};
}

inline void adam_scalar_from_json(const nlohmann::json& j, ScalarAdam& a) {
  a.m = j.at("m").get<double>();
  a.v = j.at("v").get<double>();
  a.step = j.at("step").get<long long>();
}

inline void fill_params(MlpParams& p, const Vec& data, const nlohmann::json& table,
                        const std::string& prefix, size_t& cursor) {
  p.visit([&](Vec& a) {
    const auto& e = table.at(cursor);
    const size_t off = e.at("offset").get<size_t>();
    const size_t cnt = e.at("count").get<size_t>();
    if (cnt != a.size())
      throw ConfigError("checkpoint: array size mismatch at " +
                        e.at("name").get<std::string>() + " (layout change?)");
    if (e.at("name").get<std::string>().rfind(prefix + "/", 0) != 0)
      throw ConfigError("checkpoint: manifest order mismatch at " +
                        e.at("name").get<std::string>());
    std::copy(data.begin() + off, data.begin() + off + cnt, a.begin());
    ++cursor;
  });
}

}  // namespace ckpt_detail

// Everything a stage trainer persists. Teachers are embedded so a resumed
// distillation run is self-contained.
struct CheckpointState {
  Stage stage = Stage::OneVOne;
  int policy_obs_dim = 0;
  int critic_obs_dim = 0;
  int action_dim = kActionDim;
  long long learner_step = 0;
  long long env_steps = 0;
  long long episodes = 0;

  GaussianPolicy policy;
  CriticNet critic;
  MlpParams target_policy;
  MlpParams target_critic;
  AdamState policy_adam;
  AdamState critic_adam;
  DualState dual;
  DistillState distill;
  bool has_teachers = false;
  GaussianPolicy soccer_teacher;
  GaussianPolicy getup_teacher;
  std::vector<Snapshot> pool_snapshots;

  std::vector<std::array<std::uint64_t, 4>> rng_states;
  Vec env_state;       // live env blob (deterministic mode)
  Vec actor_state;     // partial segment + counters (deterministic mode)
  bool has_replay = false;
  std::vector<TrajectorySegment> replay_segments;
};

inline void save_checkpoint(const std::string& dir, const CheckpointState& st) {
  namespace fs = std::filesystem;
  fs::create_directories(dir);
  ckpt_detail::ArrayTable table;
  table.add_params("policy", st.policy.params);
  table.add_params("critic", st.critic.params);
  table.add_params("target_policy", st.target_policy);
  table.add_params("target_critic", st.target_critic);
  for (size_t i = 0; i < st.policy_adam.m.size(); ++i) {
    table.add("policy_adam_m/" + std::to_string(i), st.policy_adam.m[i]);
    table.add("policy_adam_v/" + std::to_string(i), st.policy_adam.v[i]);
  }
  for (size_t i = 0; i < st.critic_adam.m.size(); ++i) {
    table.add("critic_adam_m/" + std::to_string(i), st.critic_adam.m[i]);
    table.add("critic_adam_v/" + std::to_string(i), st.critic_adam.v[i]);
  }
  if (st.has_teachers) {
    table.add_params("soccer_teacher", st.soccer_teacher.params);
    table.add_params("getup_teacher", st.getup_teacher.params);
  }
  for (const Snapshot& s : st.pool_snapshots)
    table.add_params("pool/" + std::to_string(s.id), s.params);

  ckpt_detail::write_doubles(dir + "/params.bin", table.data);
  const std::uint64_t hash =
      fnv1a64(table.data.data(), table.data.size() * sizeof(double));

  nlohmann::json m;
  m["schema_version"] = kCheckpointSchemaVersion;
  m["stage"] = stage_name(st.stage);
  m["policy_obs_dim"] = st.policy_obs_dim;
  m["critic_obs_dim"] = st.critic_obs_dim;
  m["action_dim"] = st.action_dim;
  m["counts"] = {{"learner_step", st.learner_step},
                 {"env_steps", st.env_steps},
                 {"episodes", st.episodes}};
  m["policy_spec"] = ckpt_detail::spec_to_json(st.policy.spec);
  m["critic_spec"] = ckpt_detail::spec_to_json(st.critic.spec);
  m["min_variance"] = st.policy.min_variance;
  if (st.has_teachers) {
    m["soccer_teacher_spec"] = ckpt_detail::spec_to_json(st.soccer_teacher.spec);
    m["getup_teacher_spec"] = ckpt_detail::spec_to_json(st.getup_teacher.spec);
  }
  m["arrays"] = table.entries;
  m["params_hash_fnv1a64"] = std::to_string(hash);
  m["policy_adam_step"] = st.policy_adam.step;
  m["critic_adam_step"] = st.critic_adam.step;
  m["dual"] = {{"eta", st.dual.eta},
               {"alpha_mean_pre", st.dual.alpha_mean_pre},
               {"alpha_cov_pre", st.dual.alpha_cov_pre},
               {"epsilon", st.dual.epsilon},
               {"beta_mean", st.dual.beta_mean},
               {"beta_cov", st.dual.beta_cov},
               {"lr", st.dual.lr},
               {"eta_adam", ckpt_detail::adam_scalar_to_json(st.dual.eta_adam)},
               {"alpha_mean_adam",
                ckpt_detail::adam_scalar_to_json(st.dual.alpha_mean_adam)},
               {"alpha_cov_adam",
                ckpt_detail::adam_scalar_to_json(st.dual.alpha_cov_adam)}};
  m["distill"] = {{"pre_f", st.distill.pre_f},
                  {"pre_g", st.distill.pre_g},
                  {"adam_f", ckpt_detail::adam_scalar_to_json(st.distill.adam_f)},
                  {"adam_g", ckpt_detail::adam_scalar_to_json(st.distill.adam_g)}};
  m["pool"] = nlohmann::json::array();
  for (const Snapshot& s : st.pool_snapshots)
    m["pool"].push_back({{"id", s.id}, {"learner_step", s.learner_step}});
  m["rng_states"] = nlohmann::json::array();
  for (const auto& s : st.rng_states)
    m["rng_states"].push_back({std::to_string(s[0]), std::to_string(s[1]),
                               std::to_string(s[2]), std::to_string(s[3])});
  m["has_replay"] = st.has_replay;
  m["env_state_len"] = st.env_state.size();
  m["actor_state_len"] = st.actor_state.size();

  // runtime state (env, actor, replay) lives in a separate binary blob
  Vec runtime;
  runtime.insert(runtime.end(), st.env_state.begin(), st.env_state.end());
  runtime.insert(runtime.end(), st.actor_state.begin(), st.actor_state.end());
  if (st.has_replay) {
    runtime.push_back(static_cast<double>(st.replay_segments.size()));
    for (const TrajectorySegment& s : st.replay_segments) {
      runtime.insert(runtime.end(),
                     {static_cast<double>(s.len), static_cast<double>(s.critic_obs_dim),
                      static_cast<double>(s.policy_obs_dim),
                      static_cast<double>(s.action_dim),
                      static_cast<double>(s.opponent_id)});
      runtime.insert(runtime.end(), s.critic_obs.begin(), s.critic_obs.end());
      runtime.insert(runtime.end(), s.policy_obs.begin(), s.policy_obs.end());
      runtime.insert(runtime.end(), s.action.begin(), s.action.end());
      runtime.insert(runtime.end(), s.reward.begin(), s.reward.end());
      runtime.insert(runtime.end(), s.discount_flag.begin(), s.discount_flag.end());
      for (unsigned char u : s.upright) runtime.push_back(u);
    }
  }
  ckpt_detail::write_doubles(dir + "/state.bin", runtime);
  m["state_hash_fnv1a64"] = std::to_string(
      fnv1a64(runtime.data(), runtime.size() * sizeof(double)));

  std::ofstream mf(dir + "/manifest.json");
  if (!mf) throw ConfigError("checkpoint: cannot write manifest in " + dir);
  mf << m.dump(2) << "\n";
}

inline CheckpointState load_checkpoint(const std::string& dir) {
  std::ifstream mf(dir + "/manifest.json");
  if (!mf) throw ConfigError("checkpoint: missing manifest in " + dir);
  nlohmann::json m;
  try {
    m = nlohmann::json::parse(mf);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("checkpoint: corrupt manifest: ") + e.what());
  }
  if (m.at("schema_version").get<int>() != kCheckpointSchemaVersion)
    throw ConfigError("checkpoint: schema version mismatch");

  CheckpointState st;
  st.stage = stage_from_name(m.at("stage").get<std::string>());
  st.policy_obs_dim = m.at("policy_obs_dim").get<int>();
  st.critic_obs_dim = m.at("critic_obs_dim").get<int>();
  st.action_dim = m.at("action_dim").get<int>();
  st.learner_step = m.at("counts").at("learner_step").get<long long>();
  st.env_steps = m.at("counts").at("env_steps").get<long long>();
  st.episodes = m.at("counts").at("episodes").get<long long>();

  const Vec data = ckpt_detail::read_doubles(dir + "/params.bin");
  const std::uint64_t hash = fnv1a64(data.data(), data.size() * sizeof(double));
  if (std::to_string(hash) != m.at("params_hash_fnv1a64").get<std::string>())
    throw ConfigError("checkpoint: params.bin hash mismatch");

  st.policy.spec = ckpt_detail::spec_from_json(m.at("policy_spec"));
  st.policy.action_dim = st.action_dim;
  st.policy.min_variance = m.at("min_variance").get<double>();
  st.policy.params = MlpParams::zeros(st.policy.spec);
  st.critic.spec = ckpt_detail::spec_from_json(m.at("critic_spec"));
  st.critic.obs_dim = st.critic_obs_dim;
  st.critic.action_dim = st.action_dim;
  st.critic.params = MlpParams::zeros(st.critic.spec);
  st.target_policy = MlpParams::zeros(st.policy.spec);
  st.target_critic = MlpParams::zeros(st.critic.spec);

  const nlohmann::json& table = m.at("arrays");
  size_t cursor = 0;
  ckpt_detail::fill_params(st.policy.params, data, table, "policy", cursor);
  ckpt_detail::fill_params(st.critic.params, data, table, "critic", cursor);
  ckpt_detail::fill_params(st.target_policy, data, table, "target_policy", cursor);
  ckpt_detail::fill_params(st.target_critic, data, table, "target_critic", cursor);

  auto fill_vec = [&](Vec& a) {
    const auto& e = table.at(cursor++);
    const size_t off = e.at("offset").get<size_t>();
    const size_t cnt = e.at("count").get<size_t>();
    if (cnt != a.size()) throw ConfigError("checkpoint: adam size mismatch");
    std::copy(data.begin() + off, data.begin() + off + cnt, a.begin());
  };
  // interleaved m/v per array, matching the save order
  st.policy_adam = AdamState::like(st.policy.params);
  for (size_t i = 0; i < st.policy_adam.m.size(); ++i) {
    fill_vec(st.policy_adam.m[i]);
    fill_vec(st.policy_adam.v[i]);
  }
  st.critic_adam = AdamState::like(st.critic.params);
  for (size_t i = 0; i < st.critic_adam.m.size(); ++i) {
    fill_vec(st.critic_adam.m[i]);
    fill_vec(st.critic_adam.v[i]);
  }
  st.policy_adam.step = m.at("policy_adam_step").get<long long>();
  st.critic_adam.step = m.at("critic_adam_step").get<long long>();

  st.has_teachers = m.contains("soccer_teacher_spec");
  if (st.has_teachers) {
    st.soccer_teacher.spec = ckpt_detail::spec_from_json(m.at("soccer_teacher_spec"));
    st.soccer_teacher.action_dim = st.action_dim;
    st.soccer_teacher.min_variance = st.policy.min_variance;
    st.soccer_teacher.params = MlpParams::zeros(st.soccer_teacher.spec);
    ckpt_detail::fill_params(st.soccer_teacher.params, data, table, "soccer_teacher",
                             cursor);
    st.getup_teacher.spec = ckpt_detail::spec_from_json(m.at("getup_teacher_spec"));
    st.getup_teacher.action_dim = st.action_dim;
    st.getup_teacher.min_variance = st.policy.min_variance;
    st.getup_teacher.params = MlpParams::zeros(st.getup_teacher.spec);
    ckpt_detail::fill_params(st.getup_teacher.params, data, table, "getup_teacher",
                             cursor);
  }
  for (const auto& pe : m.at("pool")) {
    Snapshot s;
    s.id = pe.at("id").get<int>();
    s.learner_step = pe.at("learner_step").get<long long>();
    s.params = MlpParams::zeros(st.policy.spec);
    ckpt_detail::fill_params(s.params, data, table, "pool/" + std::to_string(s.id),
                             cursor);
    st.pool_snapshots.push_back(std::move(s));
  }

  const nlohmann::json& d = m.at("dual");
  st.dual.eta = d.at("eta").get<double>();
  st.dual.alpha_mean_pre = d.at("alpha_mean_pre").get<double>();
  st.dual.alpha_cov_pre = d.at("alpha_cov_pre").get<double>();
  st.dual.epsilon = d.at("epsilon").get<double>();
  st.dual.beta_mean = d.at("beta_mean").get<double>();
  st.dual.beta_cov = d.at("beta_cov").get<double>();
  st.dual.lr = d.at("lr").get<double>();
  ckpt_detail::adam_scalar_from_json(d.at("eta_adam"), st.dual.eta_adam);
  ckpt_detail::adam_scalar_from_json(d.at("alpha_mean_adam"), st.dual.alpha_mean_adam);
  ckpt_detail::adam_scalar_from_json(d.at("alpha_cov_adam"), st.dual.alpha_cov_adam);

  const nlohmann::json& di = m.at("distill");
  st.distill.pre_f = di.at("pre_f").get<double>();
  st.distill.pre_g = di.at("pre_g").get<double>();
  ckpt_detail::adam_scalar_from_json(di.at("adam_f"), st.distill.adam_f);
  ckpt_detail::adam_scalar_from_json(di.at("adam_g"), st.distill.adam_g);

  for (const auto& rs : m.at("rng_states")) {
    std::array<std::uint64_t, 4> s;
    for (int i = 0; i < 4; ++i)
      s[i] = std::stoull(rs.at(i).get<std::string>());
    st.rng_states.push_back(s);
  }

  const Vec runtime = ckpt_detail::read_doubles(dir + "/state.bin");
  if (std::to_string(fnv1a64(runtime.data(), runtime.size() * sizeof(double))) !=
      m.at("state_hash_fnv1a64").get<std::string>())
    throw ConfigError("checkpoint: state.bin hash mismatch");
  size_t at = 0;
  const size_t env_len = m.at("env_state_len").get<size_t>();
  const size_t actor_len = m.at("actor_state_len").get<size_t>();
  st.env_state.assign(runtime.begin() + at, runtime.begin() + at + env_len);
  at += env_len;
  st.actor_state.assign(runtime.begin() + at, runtime.begin() + at + actor_len);
  at += actor_len;
  st.has_replay = m.at("has_replay").get<bool>();
  if (st.has_replay) {
    const size_t n = static_cast<size_t>(runtime[at++]);
    for (size_t k = 0; k < n; ++k) {
      TrajectorySegment s;
      s.len = static_cast<int>(runtime[at]);
      s.critic_obs_dim = static_cast<int>(runtime[at + 1]);
      s.policy_obs_dim = static_cast<int>(runtime[at + 2]);
      s.action_dim = static_cast<int>(runtime[at + 3]);
      s.opponent_id = static_cast<int>(runtime[at + 4]);
      at += 5;
      auto take = [&](Vec& dst, size_t cnt) {
        dst.assign(runtime.begin() + at, runtime.begin() + at + cnt);
        at += cnt;
      };
      take(s.critic_obs, static_cast<size_t>(s.len) * s.critic_obs_dim);
      take(s.policy_obs, static_cast<size_t>(s.len) * s.policy_obs_dim);
      take(s.action, static_cast<size_t>(s.len) * s.action_dim);
      take(s.reward, s.len);
      take(s.discount_flag, s.len);
      s.upright.resize(s.len);
      for (int i = 0; i < s.len; ++i)
        s.upright[i] = static_cast<unsigned char>(runtime[at++]);
      st.replay_segments.push_back(std::move(s));
    }
  }
  return st;
}

}  // namespace pitchrl
