#include "risctl/rl/guidance.hpp"

#include <cmath>

#include "risctl/torus/torus.hpp"

namespace risctl::rl {

void ReplayBuffer::push(Transition t) {
    if (items_.size() < capacity_) {
        items_.push_back(std::move(t));
    } else {
        items_[next_] = std::move(t);
        next_ = (next_ + 1) % capacity_;
    }
}

const Transition& ReplayBuffer::sample(Rng& rng) const {
    require(!items_.empty(), "ReplayBuffer: sample from empty buffer");
    return items_[rng.uniform_int(static_cast<int>(items_.size()))];
}

Critic::Critic(const std::string& name, int obs_dim, int action_dim, int hidden,
               Rng& rng)
    : l1_(name + ".l1", obs_dim + action_dim, hidden),
      l2_(name + ".l2", hidden, hidden),
      out_(name + ".out", hidden, 1, nn::Activation::identity) {
    l1_.init(rng);
    l2_.init(rng);
    out_.init(rng);
}

nn::Tape::Var Critic::forward(nn::Tape& tape, const Observation& obs,
                              nn::Tape::Var action_embedding) {
    nn::Tensor flat(obs.tokens.size(), 1);
    flat.data = obs.tokens.data;
    nn::Tape::Var in = tape.concat_rows(tape.constant(flat), action_embedding);
    return dense_apply(tape, out_,
                       dense_apply(tape, l2_, dense_apply(tape, l1_, in)));
}

double Critic::eval(const Observation& obs,
                    std::span<const double> action_theta) {
    nn::Tape tape;
    const torus::TorusPoint emb = torus::embed_phases(action_theta);
    nn::Tape::Var a = tape.constant(nn::Tensor::column(emb.v));
    return tape.value(forward(tape, obs, a)).data[0];
}

std::vector<nn::ParamTensor*> Critic::params() {
    std::vector<nn::ParamTensor*> out;
    for (auto* p : l1_.params()) out.push_back(p);
    for (auto* p : l2_.params()) out.push_back(p);
    for (auto* p : out_.params()) out.push_back(p);
    return out;
}

CriticPair::CriticPair(int obs_dim, int action_dim, int hidden, Rng& rng)
    : q1("critic1", obs_dim, action_dim, hidden, rng),
      q2("critic2", obs_dim, action_dim, hidden, rng) {}

std::pair<double, double> CriticPair::eval(const Observation& obs,
                                           std::span<const double> action_theta) {
    return {q1.eval(obs, action_theta), q2.eval(obs, action_theta)};
}

std::vector<nn::ParamTensor*> CriticPair::params() {
    std::vector<nn::ParamTensor*> out = q1.params();
    for (auto* p : q2.params()) out.push_back(p);
    return out;
}

std::pair<double, double> critic_update(CriticPair& critics,
                                        std::span<const Transition* const> batch,
                                        nn::AdamOptimizer& opt1,
                                        nn::AdamOptimizer& opt2) {
    require(!batch.empty(), "critic_update: empty batch");
    const double inv = 1.0 / static_cast<double>(batch.size());
    double losses[2] = {0.0, 0.0};
    Critic* nets[2] = {&critics.q1, &critics.q2};
    nn::AdamOptimizer* opts[2] = {&opt1, &opt2};
    for (int c = 0; c < 2; ++c) {
        auto params = nets[c]->params();
        nn::AdamOptimizer::zero_grad(params);
        double total = 0.0;
        for (const Transition* tr : batch) {
            nn::Tape tape;
            const torus::TorusPoint emb = torus::embed_phases(tr->action);
            nn::Tape::Var a = tape.constant(nn::Tensor::column(emb.v));
            nn::Tape::Var q = nets[c]->forward(tape, tr->obs, a);
            nn::Tensor target(1, 1);
            target.data[0] = tr->reward;
            nn::Tape::Var loss = tape.scale(tape.mse(q, target), inv);
            total += tape.value(loss).data[0];
            tape.backward(loss);
        }
        if (!std::isfinite(total))
            throw Error("critic_update: non-finite loss");
        opts[c]->step(params);
        losses[c] = total;
    }
    ++critics.update_count;
    return {losses[0], losses[1]};
}

double actor_update(diffusion::Denoiser& denoiser, CriticPair& critics,
                    std::span<const Observation* const> obs_batch,
                    const diffusion::DiffusionSchedule& schedule,
                    nn::AdamOptimizer& opt, Rng& rng,
                    diffusion::Guidance guidance) {
    require(!obs_batch.empty(), "actor_update: empty batch");
    const double inv = 1.0 / static_cast<double>(obs_batch.size());
    auto actor_params = denoiser.params();
    auto critic_params = critics.params();
    nn::AdamOptimizer::zero_grad(actor_params);

    double mean_q = 0.0;
    for (const Observation* obs : obs_batch) {
        diffusion::SampleResult res =
            diffusion::reverse_sample(denoiser, schedule, *obs, rng, guidance);
        nn::Tape::Var q = critics.q1.forward(res.tape, *obs, res.x0);
        mean_q += res.tape.value(q).data[0] * inv;
        // maximize E[Q1]: descend on -Q1 / B
        nn::Tape::Var loss = res.tape.scale(q, -inv);
        res.tape.backward(loss);
    }
    opt.step(actor_params);
    nn::AdamOptimizer::zero_grad(actor_params);
    // the critics are frozen; drop the gradient the backward pass parked
    nn::AdamOptimizer::zero_grad(critic_params);
    return mean_q;
}

TrainResult train_loop(const std::function<Observation(Rng&)>& env,
                       diffusion::Denoiser& denoiser, CriticPair& critics,
                       const diffusion::DiffusionSchedule& schedule,
                       const TrainConfig& cfg, Rng& rng) {
    TrainResult result;
    if (cfg.env_steps <= 0) return result;

    ReplayBuffer buffer(cfg.capacity);
    nn::AdamOptimizer copt1(cfg.critic_lr), copt2(cfg.critic_lr);
    nn::AdamOptimizer aopt(cfg.actor_lr);

    std::vector<double> recent;
    recent.reserve(cfg.env_steps);
    double q1_loss = 0.0, q2_loss = 0.0;

    for (int step = 0; step < cfg.env_steps; ++step) {
        const double frac =
            cfg.env_steps > 1 ? static_cast<double>(step) / (cfg.env_steps - 1)
                              : 1.0;
        const double explore =
            cfg.explore_start + (cfg.explore_end - cfg.explore_start) * frac;

        Observation obs = env(rng);
        diffusion::SampleResult sample = diffusion::reverse_sample(
            denoiser, schedule, obs, rng, cfg.guidance, explore, cfg.manifold);
        const double reward = channel::achievable_rate(
            obs.csi, sample.phases,
            channel::RisActivation::all_on(obs.csi.num_ris()), obs.scene,
            channel::RateMode::on_config);
        recent.push_back(reward);

        Transition tr;
        tr.obs = std::move(obs);
        tr.action = sample.phases.theta;
        tr.reward = reward;
        buffer.push(std::move(tr));

        if (buffer.size() >= static_cast<size_t>(cfg.warmup)) {
            std::vector<const Transition*> batch(cfg.batch);
            for (int b = 0; b < cfg.batch; ++b) batch[b] = &buffer.sample(rng);
            std::tie(q1_loss, q2_loss) =
                critic_update(critics, batch, copt1, copt2);

            if (critics.update_count % cfg.delay == 0) {
                std::vector<const Observation*> obatch(cfg.actor_batch);
                for (int b = 0; b < cfg.actor_batch; ++b)
                    obatch[b] = &buffer.sample(rng).obs;
                actor_update(denoiser, critics, obatch, schedule, aopt, rng,
                             cfg.guidance);
            }
            for (nn::ParamTensor* p : denoiser.params())
                require(p->value.all_finite(),
                        "train_loop: non-finite actor parameter " + p->name);
            for (nn::ParamTensor* p : critics.params())
                require(p->value.all_finite(),
                        "train_loop: non-finite critic parameter " + p->name);
        }

        const size_t win = std::min<size_t>(recent.size(), 100);
        double mean = 0.0;
        for (size_t i = recent.size() - win; i < recent.size(); ++i)
            mean += recent[i];
        mean /= static_cast<double>(win);
        result.curve.push_back({step, mean, q1_loss, q2_loss});
    }
    result.final_mean_reward = result.curve.back().mean_reward;
    return result;
}

}  // namespace risctl::rl
