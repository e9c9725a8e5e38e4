#include "swann/rl/objectives.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <numbers>
#include <stdexcept>

#include "swann/util/fast_math.hpp"

namespace swann::rl {

namespace {

constexpr double kNormTiny = 1e-12;

void check_scaled_rewards(const Batch& batch) {
  for (int e = 0; e < batch.size; ++e)
    if (batch.r[e] > 1.0)
      throw std::runtime_error(
          "critic targets: reward > 1 (missing (1-gamma) scaling?)");
}

double clamp01(double v) { return std::clamp(v, 0.0, 1.0); }

// concatenate state and action into elem.qin
void fill_qin(Workspace::Elem& el, std::span<const double> s,
              std::span<const double> a) {
  el.qin.resize(s.size() + a.size());
  std::copy(s.begin(), s.end(), el.qin.begin());
  std::copy(a.begin(), a.end(), el.qin.begin() + s.size());
}

double l2_diff(std::span<const double> a, std::span<const double> b) {
  double acc = 0.0;
  for (size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    acc += d * d;
  }
  return std::sqrt(acc);
}

struct FactorChain {
  double value = 1.0;   // w / (w + L)
  double dlogdL = 0.0;  // d log(value) / dL = -1/(w+L)
};

FactorChain soft_factor(double w, double L) {
  return {w / (w + L), -1.0 / (w + L)};
}

}  // namespace

void critic_targets(nn::ExecMode mode, const nn::Mlp& policy_target,
                    const nn::Mlp& q_target, const nn::Mlp* q2_target,
                    double gamma, const Batch& batch, Workspace& ws,
                    std::span<double> y_out) {
  check_scaled_rewards(batch);
  ws.ensure(batch.size, 0);
  nn::for_each_index(mode, batch.size, [&](int e) {
    auto& el = ws.elems[e];
    nn::forward(policy_target, batch.next_state(e), el.pol_s2);
    fill_qin(el, batch.next_state(e), el.pol_s2.act.back());
    nn::forward(q_target, el.qin, el.q_live);
    double qv = el.q_live.act.back()[0];
    if (q2_target) {
      nn::forward(*q2_target, el.qin, el.q_live2);
      qv = std::min(qv, el.q_live2.act.back()[0]);
    }
    y_out[e] = clamp01(batch.r[e] + gamma * (1.0 - batch.done[e]) * qv);
  });
}

void critic_targets_td3(nn::ExecMode mode, const nn::Mlp& policy_target,
                        const nn::Mlp& q1_target, const nn::Mlp& q2_target,
                        double gamma, const Batch& batch, Workspace& ws,
                        std::span<double> y_out) {
  check_scaled_rewards(batch);
  if (batch.smooth_eps.size() !=
      static_cast<size_t>(batch.size) * batch.act_dim)
    throw std::invalid_argument("td3 targets: smooth_eps not filled");
  ws.ensure(batch.size, 0);
  nn::for_each_index(mode, batch.size, [&](int e) {
    auto& el = ws.elems[e];
    nn::forward(policy_target, batch.next_state(e), el.pol_s2);
    std::vector<double> a2 = el.pol_s2.act.back();
    for (int i = 0; i < batch.act_dim; ++i)
      a2[i] = std::clamp(
          a2[i] + batch.smooth_eps[static_cast<size_t>(e) * batch.act_dim + i],
          -1.0, 1.0);
    fill_qin(el, batch.next_state(e), a2);
    nn::forward(q1_target, el.qin, el.q_live);
    nn::forward(q2_target, el.qin, el.q_live2);
    const double qv =
        std::min(el.q_live.act.back()[0], el.q_live2.act.back()[0]);
    y_out[e] = clamp01(batch.r[e] + gamma * (1.0 - batch.done[e]) * qv);
  });
}

namespace {

// squashed-Gaussian sample and log-prob from a SAC policy output
struct SacSample {
  std::vector<double> a;        // tanh(mu + sigma xi)
  std::vector<double> sigma;    // exp(clamped log std)
  std::vector<double> mu;
  std::vector<bool> ls_active;  // log-std clamp pass-through
  double logp = 0.0;
};

constexpr double kLogStdMin = -20.0;
constexpr double kLogStdMax = 2.0;
constexpr double kSquashEps = 1e-6;

SacSample sac_sample(std::span<const double> head, std::span<const double> xi,
                     int act_dim) {
  SacSample out;
  out.a.resize(act_dim);
  out.sigma.resize(act_dim);
  out.mu.resize(act_dim);
  out.ls_active.resize(act_dim);
  constexpr double half_log_2pi = 0.9189385332046727;
  for (int i = 0; i < act_dim; ++i) {
    const double mu = head[i];
    const double ls_raw = head[act_dim + i];
    const double ls = std::clamp(ls_raw, kLogStdMin, kLogStdMax);
    out.ls_active[i] = ls_raw > kLogStdMin && ls_raw < kLogStdMax;
    const double sigma = fast_exp(ls);
    const double u = mu + sigma * xi[i];
    const double a = fast_tanh(u);
    out.mu[i] = mu;
    out.sigma[i] = sigma;
    out.a[i] = a;
    out.logp += -0.5 * xi[i] * xi[i] - ls - half_log_2pi -
                std::log(1.0 - a * a + kSquashEps);
  }
  return out;
}

}  // namespace

void critic_targets_sac(nn::ExecMode mode, const nn::Mlp& policy,
                        const nn::Mlp& q1_target, const nn::Mlp& q2_target,
                        double gamma, double alpha, const Batch& batch,
                        Workspace& ws, std::span<double> y_out) {
  check_scaled_rewards(batch);
  if (batch.xi_next.size() != static_cast<size_t>(batch.size) * batch.act_dim)
    throw std::invalid_argument("sac targets: xi_next not filled");
  ws.ensure(batch.size, 0);
  nn::for_each_index(mode, batch.size, [&](int e) {
    auto& el = ws.elems[e];
    nn::forward(policy, batch.next_state(e), el.pol_s2);
    const auto smp = sac_sample(
        el.pol_s2.act.back(),
        std::span<const double>(
            batch.xi_next.data() + static_cast<size_t>(e) * batch.act_dim,
            batch.act_dim),
        batch.act_dim);
    fill_qin(el, batch.next_state(e), smp.a);
    nn::forward(q1_target, el.qin, el.q_live);
    nn::forward(q2_target, el.qin, el.q_live2);
    const double qv =
        std::min(el.q_live.act.back()[0], el.q_live2.act.back()[0]) -
        alpha * smp.logp;
    y_out[e] = clamp01(batch.r[e] + gamma * (1.0 - batch.done[e]) * qv);
  });
}

double critic_regress(nn::ExecMode mode, nn::Mlp& q, nn::AdamState& opt,
                      const Batch& batch, std::span<const double> y,
                      Workspace& ws) {
  const size_t np = q.param_count();
  ws.ensure(batch.size, np);
  const double inv_b = 1.0 / batch.size;
  nn::for_each_index(mode, batch.size, [&](int e) {
    auto& el = ws.elems[e];
    double* row = ws.grad_rows.data() + static_cast<size_t>(e) * np;
    std::fill(row, row + np, 0.0);
    fill_qin(el, batch.state(e), batch.action(e));
    nn::forward(q, el.qin, el.q_live);
    const double qv = el.q_live.act.back()[0];
    if (!std::isfinite(qv))
      throw std::runtime_error("critic regress: non-finite Q");
    ws.values[e] = qv - y[e];
    const double dq = (qv - y[e]) * inv_b;
    const std::array<double, 1> dout{dq};
    nn::backward(q, el.q_live, dout, {}, {row, np});
  });
  nn::reduce_rows(mode, ws.grad_rows.data(), batch.size, np, np,
                  ws.grad.data());
  nn::adam_step(opt, q.params, std::span<const double>(ws.grad.data(), np));
  double mse = 0.0;
  for (int e = 0; e < batch.size; ++e) mse += ws.values[e] * ws.values[e];
  return mse / batch.size;
}

namespace {

// Shared per-element machinery for the composed objectives. Computes the
// policy branches at s, s_next, s_pert (plus an anchor branch), the live-Q
// chain, and backprops the requested upstream gradients into `row`.
struct BranchUpstream {
  double dq = 0.0;       // d loss_e / d Q   (before clamp gating)
  double dlt = 0.0;      // d loss_e / d L_T
  double dls = 0.0;      // d loss_e / d L_S
  double dpre = 0.0;     // d loss_e / d P (mean abs pre-activation)
  double dq_anchor = 0.0;
};

struct ElemFactors {
  double q_raw = 0.0, q_clamped = 0.0;
  double lt = 0.0, ls = 0.0, pre = 0.0;
  double q_anchor_raw = 0.0, q_anchor_clamped = 0.0;
};

// forwards all policy branches and the live critic; fills factors
void eval_branches(const AgentBundle& b, const Batch& batch, int e,
                   bool with_anchor, const AnchorStates* anchor,
                   Workspace::Elem& el, ElemFactors& f) {
  nn::forward(b.policy, batch.state(e), el.pol_s);
  nn::forward(b.policy, batch.next_state(e), el.pol_s2);
  nn::forward(b.policy, batch.pert_state(e), el.pol_pert);
  const auto& a_s = el.pol_s.act.back();
  f.lt = l2_diff(a_s, el.pol_s2.act.back());
  f.ls = l2_diff(a_s, el.pol_pert.act.back());
  const auto& z = el.pol_s.pre.back();
  double pre = 0.0;
  for (double v : z) pre += std::fabs(v);
  f.pre = pre / static_cast<double>(z.size());

  fill_qin(el, batch.state(e), a_s);
  nn::forward(b.q1, el.qin, el.q_live);
  f.q_raw = el.q_live.act.back()[0];
  f.q_clamped = std::clamp(f.q_raw, b.w.q_eps, 1.0);

  if (with_anchor) {
    nn::forward(b.policy, anchor->state(e), el.pol_anchor);
    fill_qin(el, anchor->state(e), el.pol_anchor.act.back());
    nn::forward(*b.q_anchor, el.qin, el.q_anchor);
    f.q_anchor_raw = el.q_anchor.act.back()[0];
    f.q_anchor_clamped = std::clamp(f.q_anchor_raw, b.w.q_eps, 1.0);
  }
  if (!std::isfinite(f.q_raw) || !std::isfinite(f.lt) || !std::isfinite(f.ls) ||
      !std::isfinite(f.pre))
    throw std::runtime_error("actor objective: non-finite factor input");
}

// backprops the upstream sensitivities through every branch into row
void backprop_branches(const AgentBundle& b, bool with_anchor,
                       const BranchUpstream& up, const ElemFactors& f,
                       Workspace::Elem& el, double* row, size_t np) {
  const int act_dim = b.act_dim;
  const auto& a_s = el.pol_s.act.back();
  const auto& a_s2 = el.pol_s2.act.back();
  const auto& a_sp = el.pol_pert.act.back();

  el.dout.assign(a_s.size(), 0.0);
  el.dout2.assign(a_s.size(), 0.0);
  el.dout3.assign(a_s.size(), 0.0);

  // live-Q chain: input grad of q1 at (s, pi(s))
  if (up.dq != 0.0) {
    el.dqin.assign(el.q_live.act[0].size(), 0.0);
    const std::array<double, 1> dq_out{up.dq};
    nn::backward(b.q1, el.q_live, dq_out, {}, {}, el.dqin);
    for (int i = 0; i < act_dim; ++i)
      el.dout[i] += el.dqin[b.obs_dim + i];
  }

  // temporal and spatial difference chains
  if (f.lt > kNormTiny && up.dlt != 0.0) {
    for (size_t i = 0; i < a_s.size(); ++i) {
      const double u = (a_s[i] - a_s2[i]) / f.lt;
      el.dout[i] += up.dlt * u;
      el.dout2[i] -= up.dlt * u;
    }
  }
  if (f.ls > kNormTiny && up.dls != 0.0) {
    for (size_t i = 0; i < a_s.size(); ++i) {
      const double u = (a_s[i] - a_sp[i]) / f.ls;
      el.dout[i] += up.dls * u;
      el.dout3[i] -= up.dls * u;
    }
  }

  // pre-activation magnitude chain
  const auto& z = el.pol_s.pre.back();
  const bool want_pre = up.dpre != 0.0;
  if (want_pre) {
    el.dpre.assign(z.size(), 0.0);
    const double c = up.dpre / static_cast<double>(z.size());
    for (size_t i = 0; i < z.size(); ++i)
      el.dpre[i] = z[i] >= 0.0 ? c : -c;
  }

  nn::backward(b.policy, el.pol_s, el.dout,
               want_pre ? std::span<const double>(el.dpre)
                        : std::span<const double>{},
               {row, np});
  nn::backward(b.policy, el.pol_s2, el.dout2, {}, {row, np});
  nn::backward(b.policy, el.pol_pert, el.dout3, {}, {row, np});

  if (with_anchor && up.dq_anchor != 0.0) {
    const auto& a_an = el.pol_anchor.act.back();
    el.dqin.assign(el.q_anchor.act[0].size(), 0.0);
    const std::array<double, 1> dq_out{up.dq_anchor};
    nn::backward(*b.q_anchor, el.q_anchor, dq_out, {}, {}, el.dqin);
    el.dout4.assign(a_an.size(), 0.0);
    for (int i = 0; i < act_dim; ++i)
      el.dout4[i] = el.dqin[b.obs_dim + i];
    nn::backward(b.policy, el.pol_anchor, el.dout4, {}, {row, np});
  }
}

void require_pert_states(const Batch& batch) {
  if (batch.s_pert.size() != static_cast<size_t>(batch.size) * batch.obs_dim)
    throw std::invalid_argument("actor objective: s_pert not filled");
  if (batch.s2.empty())
    throw std::invalid_argument("actor objective: batch lacks next states");
}

ActorEval finish(nn::ExecMode mode, const AgentBundle& b, int size,
                 Workspace& ws, size_t np) {
  ActorEval out;
  nn::reduce_rows(mode, ws.grad_rows.data(), size, np, np, ws.grad.data());
  out.dpolicy.assign(ws.grad.begin(), ws.grad.begin() + np);
  double loss = 0.0, j = 0.0, q = 0.0, qa = 0.0, lt = 0.0, ls = 0.0, pre = 0.0;
  double jmin = 2.0, jmax = -2.0;
  for (int e = 0; e < size; ++e) {
    const auto& el = ws.elems[e];
    loss += ws.values[e];
    j += el.j;
    q += el.q;
    qa += el.qpsi;
    lt += el.lt;
    ls += el.ls;
    pre += el.pre;
    jmin = std::min(jmin, el.j);
    jmax = std::max(jmax, el.j);
  }
  const double inv = 1.0 / size;
  out.loss = loss * inv;
  out.mean_j = j * inv;
  out.mean_q = q * inv;
  out.mean_q_anchor = qa * inv;
  out.mean_lt = lt * inv;
  out.mean_ls = ls * inv;
  out.mean_pre = pre * inv;
  out.min_j = jmin;
  out.max_j = jmax;
  (void)b;
  return out;
}

}  // namespace

ActorEval caps_linear_objective(nn::ExecMode mode, const AgentBundle& b,
                                const Batch& batch, Workspace& ws) {
  require_pert_states(batch);
  const size_t np = b.policy.param_count();
  ws.ensure(batch.size, np);
  const double inv_b = 1.0 / batch.size;
  nn::for_each_index(mode, batch.size, [&](int e) {
    auto& el = ws.elems[e];
    double* row = ws.grad_rows.data() + static_cast<size_t>(e) * np;
    std::fill(row, row + np, 0.0);
    ElemFactors f;
    eval_branches(b, batch, e, false, nullptr, el, f);
    const double j = f.q_raw - b.w.lambda_t * f.lt - b.w.lambda_s * f.ls;
    ws.values[e] = -j;
    el.j = j;
    el.q = f.q_raw;
    el.lt = f.lt;
    el.ls = f.ls;
    el.pre = f.pre;
    el.qpsi = 0.0;
    BranchUpstream up;
    up.dq = -inv_b;
    up.dlt = b.w.lambda_t * inv_b;
    up.dls = b.w.lambda_s * inv_b;
    up.dpre = 0.0;
    backprop_branches(b, false, up, f, el, row, np);
  });
  return finish(mode, b, batch.size, ws, np);
}

ActorEval multiplicative_objective(nn::ExecMode mode, const AgentBundle& b,
                                   const Batch& batch, Workspace& ws) {
  require_pert_states(batch);
  const size_t np = b.policy.param_count();
  ws.ensure(batch.size, np);
  const double inv_b = 1.0 / batch.size;
  nn::for_each_index(mode, batch.size, [&](int e) {
    auto& el = ws.elems[e];
    double* row = ws.grad_rows.data() + static_cast<size_t>(e) * np;
    std::fill(row, row + np, 0.0);
    ElemFactors f;
    eval_branches(b, batch, e, false, nullptr, el, f);
    const auto ft = soft_factor(b.w.w_t, f.lt);
    const auto fs = soft_factor(b.w.w_s, f.ls);
    const auto fa = soft_factor(b.w.w_a, f.pre);
    const double logj = 0.25 * (std::log(f.q_clamped) + std::log(ft.value) +
                                std::log(fs.value) + std::log(fa.value));
    const double j = fast_exp(logj);
    if (!(j > 0.0 && j <= 1.0 + 1e-12))
      throw std::runtime_error("multiplicative objective: J outside (0,1]");
    ws.values[e] = -j;
    el.j = j;
    el.q = f.q_clamped;
    el.lt = f.lt;
    el.ls = f.ls;
    el.pre = f.pre;
    el.qpsi = 0.0;
    BranchUpstream up;
    const double base = -inv_b * j * 0.25;  // d(-J/B)/d(log factor)
    up.dq = (f.q_raw > b.w.q_eps && f.q_raw < 1.0) ? base / f.q_clamped : 0.0;
    up.dlt = base * ft.dlogdL;
    up.dls = base * fs.dlogdL;
    up.dpre = base * fa.dlogdL;
    backprop_branches(b, false, up, f, el, row, np);
  });
  return finish(mode, b, batch.size, ws, np);
}

ActorEval anchored_objective(nn::ExecMode mode, const AgentBundle& b,
                             const Batch& live_batch,
                             const AnchorStates& sim_states, Workspace& ws) {
  require_pert_states(live_batch);
  if (!b.anchored())
    throw std::runtime_error("anchored objective: agent has no anchor critic");
  if (live_batch.role != BufferRole::Live)
    throw std::runtime_error("anchored objective: batch must come from the live buffer");
  if (sim_states.size != live_batch.size)
    throw std::invalid_argument("anchored objective: anchor state count mismatch");
  if (sim_states.size == 0)
    throw std::runtime_error("anchored objective: anchor without anchor data");
  const size_t np = b.policy.param_count();
  ws.ensure(live_batch.size, np);
  const double inv_b = 1.0 / live_batch.size;
  nn::for_each_index(mode, live_batch.size, [&](int e) {
    auto& el = ws.elems[e];
    double* row = ws.grad_rows.data() + static_cast<size_t>(e) * np;
    std::fill(row, row + np, 0.0);
    ElemFactors f;
    eval_branches(b, live_batch, e, true, &sim_states, el, f);
    const auto ft = soft_factor(b.w.w_t, f.lt);
    const auto fs = soft_factor(b.w.w_s, f.ls);
    const auto fa = soft_factor(b.w.w_a, f.pre);
    const double logj =
        0.2 * (std::log(f.q_clamped) + b.w.w_psi * std::log(f.q_anchor_clamped) +
               std::log(ft.value) + std::log(fs.value) + std::log(fa.value));
    const double j = fast_exp(logj);
    if (!(j > 0.0 && j <= 1.0 + 1e-12))
      throw std::runtime_error("anchored objective: J outside (0,1]");
    ws.values[e] = -j;
    el.j = j;
    el.q = f.q_clamped;
    el.qpsi = f.q_anchor_clamped;
    el.lt = f.lt;
    el.ls = f.ls;
    el.pre = f.pre;
    BranchUpstream up;
    const double base = -inv_b * j * 0.2;
    up.dq = (f.q_raw > b.w.q_eps && f.q_raw < 1.0) ? base / f.q_clamped : 0.0;
    up.dq_anchor =
        (f.q_anchor_raw > b.w.q_eps && f.q_anchor_raw < 1.0)
            ? base * b.w.w_psi / f.q_anchor_clamped
            : 0.0;
    up.dlt = base * ft.dlogdL;
    up.dls = base * fs.dlogdL;
    up.dpre = base * fa.dlogdL;
    backprop_branches(b, true, up, f, el, row, np);
  });
  return finish(mode, b, live_batch.size, ws, np);
}

double update_anchor_critic(nn::ExecMode mode, AgentBundle& b,
                            const Batch& sim_batch, Workspace& ws) {
  if (!b.anchored())
    throw std::runtime_error("update_anchor_critic: agent not in anchored mode");
  if (sim_batch.role != BufferRole::Sim)
    throw std::runtime_error("update_anchor_critic: batch must come from the sim buffer");
  if (sim_batch.size == 0)
    throw std::runtime_error("update_anchor_critic: empty sim batch");
  std::vector<double> y(sim_batch.size);
  critic_targets(mode, b.policy_target, *b.q_anchor_target, nullptr,
                 b.w.gamma, sim_batch, ws, y);
  return critic_regress(mode, *b.q_anchor, *b.opt_anchor, sim_batch, y, ws);
}

ActorEval sac_objective(nn::ExecMode mode, const AgentBundle& b,
                        const Batch& batch, const AnchorStates* sim_states,
                        Workspace& ws) {
  if (batch.xi.size() != static_cast<size_t>(batch.size) * batch.act_dim)
    throw std::invalid_argument("sac objective: xi not filled");
  const bool anchored = sim_states != nullptr;
  if (anchored && !b.anchored())
    throw std::runtime_error("sac objective: agent has no anchor critic");
  if (anchored) require_pert_states(batch);
  const size_t np = b.policy.param_count();
  const int act_dim = b.act_dim;
  ws.ensure(batch.size, np);
  const double inv_b = 1.0 / batch.size;
  const double alpha = b.sac_alpha;

  nn::for_each_index(mode, batch.size, [&](int e) {
    auto& el = ws.elems[e];
    double* row = ws.grad_rows.data() + static_cast<size_t>(e) * np;
    std::fill(row, row + np, 0.0);

    nn::forward(b.policy, batch.state(e), el.pol_s);
    const auto& head = el.pol_s.act.back();
    const std::span<const double> xi(
        batch.xi.data() + static_cast<size_t>(e) * act_dim, act_dim);
    const auto smp = sac_sample(head, xi, act_dim);

    fill_qin(el, batch.state(e), smp.a);
    nn::forward(b.q1, el.qin, el.q_live);
    nn::forward(*b.q2, el.qin, el.q_live2);
    const double q1v = el.q_live.act.back()[0];
    const double q2v = el.q_live2.act.back()[0];
    const bool use_q1 = q1v <= q2v;
    const double qmin = use_q1 ? q1v : q2v;

    // deterministic-mean branches for the composed regularizers
    double j = 0.0, dj_dqmin = 0.0, dj_dqpsi = 0.0;
    ElemFactors f;
    FactorChain ft{1.0, 0.0}, fs{1.0, 0.0}, fa{1.0, 0.0};
    std::vector<double> det_a(act_dim), det_a2(act_dim), det_ap(act_dim);
    if (anchored) {
      nn::forward(b.policy, batch.next_state(e), el.pol_s2);
      nn::forward(b.policy, batch.pert_state(e), el.pol_pert);
      for (int i = 0; i < act_dim; ++i) {
        det_a[i] = fast_tanh(head[i]);
        det_a2[i] = fast_tanh(el.pol_s2.act.back()[i]);
        det_ap[i] = fast_tanh(el.pol_pert.act.back()[i]);
      }
      f.lt = l2_diff(det_a, det_a2);
      f.ls = l2_diff(det_a, det_ap);
      double pre = 0.0;
      for (int i = 0; i < act_dim; ++i) pre += std::fabs(head[i]);
      f.pre = pre / act_dim;
      ft = soft_factor(b.w.w_t, f.lt);
      fs = soft_factor(b.w.w_s, f.ls);
      fa = soft_factor(b.w.w_a, f.pre);

      nn::forward(b.policy, sim_states->state(e), el.pol_anchor);
      std::vector<double> a_an(act_dim);
      for (int i = 0; i < act_dim; ++i)
        a_an[i] = fast_tanh(el.pol_anchor.act.back()[i]);
      fill_qin(el, sim_states->state(e), a_an);
      nn::forward(*b.q_anchor, el.qin, el.q_anchor);
      f.q_anchor_raw = el.q_anchor.act.back()[0];
      f.q_anchor_clamped = std::clamp(f.q_anchor_raw, b.w.q_eps, 1.0);

      const double qmin_cl = std::clamp(qmin, b.w.q_eps, 1.0);
      const double logj =
          0.2 * (std::log(qmin_cl) + b.w.w_psi * std::log(f.q_anchor_clamped) +
                 std::log(ft.value) + std::log(fs.value) + std::log(fa.value));
      j = fast_exp(logj);
      dj_dqmin =
          (qmin > b.w.q_eps && qmin < 1.0) ? j * 0.2 / qmin_cl : 0.0;
      dj_dqpsi = (f.q_anchor_raw > b.w.q_eps && f.q_anchor_raw < 1.0)
                     ? j * 0.2 * b.w.w_psi / f.q_anchor_clamped
                     : 0.0;
      el.q = qmin_cl;
    } else {
      j = qmin;
      dj_dqmin = 1.0;
      el.q = qmin;
    }

    const double loss_e = alpha * smp.logp - j;
    ws.values[e] = loss_e;
    el.j = anchored ? j : clamp01(j);
    el.qpsi = f.q_anchor_clamped;
    el.lt = f.lt;
    el.ls = f.ls;
    el.pre = f.pre;

    // d loss_e / d a_i via the chosen critic
    el.dqin.assign(el.q_live.act[0].size(), 0.0);
    const std::array<double, 1> dq_out{-dj_dqmin * inv_b};
    nn::backward(use_q1 ? b.q1 : *b.q2, use_q1 ? el.q_live : el.q_live2,
                 dq_out, {}, {}, el.dqin);

    // combine into d loss / d (mu, log std)
    el.dout.assign(2 * act_dim, 0.0);
    for (int i = 0; i < act_dim; ++i) {
      const double a = smp.a[i];
      const double one_m_a2 = 1.0 - a * a;
      const double dlogp_du = 2.0 * a * one_m_a2 / (one_m_a2 + kSquashEps);
      const double dq_da = el.dqin[b.obs_dim + i];
      // mu
      el.dout[i] += alpha * inv_b * dlogp_du + dq_da * one_m_a2;
      // log std (through u = mu + sigma xi and the -log sigma term)
      if (smp.ls_active[i]) {
        const double du_dls = smp.sigma[i] * xi[i];
        el.dout[act_dim + i] += alpha * inv_b * (dlogp_du * du_dls - 1.0) +
                                dq_da * one_m_a2 * du_dls;
      }
    }

    if (anchored) {
      // regularizer chains act on the deterministic mean head
      el.dout2.assign(2 * act_dim, 0.0);
      el.dout3.assign(2 * act_dim, 0.0);
      const double base = -inv_b * j * 0.2;
      const double dlt = base * ft.dlogdL;
      const double dls = base * fs.dlogdL;
      const double dpre = base * fa.dlogdL;
      if (f.lt > kNormTiny) {
        for (int i = 0; i < act_dim; ++i) {
          const double u = (det_a[i] - det_a2[i]) / f.lt;
          el.dout[i] += dlt * u * (1.0 - det_a[i] * det_a[i]);
          el.dout2[i] -= dlt * u * (1.0 - det_a2[i] * det_a2[i]);
        }
      }
      if (f.ls > kNormTiny) {
        for (int i = 0; i < act_dim; ++i) {
          const double u = (det_a[i] - det_ap[i]) / f.ls;
          el.dout[i] += dls * u * (1.0 - det_a[i] * det_a[i]);
          el.dout3[i] -= dls * u * (1.0 - det_ap[i] * det_ap[i]);
        }
      }
      for (int i = 0; i < act_dim; ++i)
        el.dout[i] += (dpre / act_dim) * (head[i] >= 0.0 ? 1.0 : -1.0);

      nn::backward(b.policy, el.pol_s2, el.dout2, {}, {row, np});
      nn::backward(b.policy, el.pol_pert, el.dout3, {}, {row, np});

      // anchor-Q chain through tanh of the mean head at sim states
      const double dq_anchor = -inv_b * dj_dqpsi;
      if (dq_anchor != 0.0) {
        el.dqin.assign(el.q_anchor.act[0].size(), 0.0);
        std::vector<double> a_an(act_dim);
        for (int i = 0; i < act_dim; ++i)
          a_an[i] = fast_tanh(el.pol_anchor.act.back()[i]);
        const std::array<double, 1> dqa_out{dq_anchor};
        nn::backward(*b.q_anchor, el.q_anchor, dqa_out, {}, {}, el.dqin);
        el.dout4.assign(2 * act_dim, 0.0);
        for (int i = 0; i < act_dim; ++i)
          el.dout4[i] =
              el.dqin[b.obs_dim + i] * (1.0 - a_an[i] * a_an[i]);
        nn::backward(b.policy, el.pol_anchor, el.dout4, {}, {row, np});
      }
    }

    nn::backward(b.policy, el.pol_s, el.dout, {}, {row, np});
  });

  return finish(mode, b, batch.size, ws, np);
}

}  // namespace swann::rl
