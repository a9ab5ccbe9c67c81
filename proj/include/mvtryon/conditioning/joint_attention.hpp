#pragma once

#include <string>

#include "mvtryon/nn/layers.hpp"

namespace mvt::cond {

struct JointAttentionBlock {
    Var norm1_gain, norm1_bias, norm2_gain, norm2_bias;
    nn::LinearLayer self_q, self_k, self_v;
    nn::LinearLayer global_q, global_k, global_v;
    nn::LinearLayer local_q, local_k, local_v;
    Var fusion;  // per-channel weight of the local branch, [d]
};

// fusion starts at zero.
void declare_joint_attention(nn::LayerSpec& spec, const std::string& prefix, std::size_t dim, std::size_t global_dim,
                             std::size_t local_dim);
JointAttentionBlock bind_joint_attention(nn::Binder& bind, const std::string& prefix);

struct JointAttentionTrace {
    Var residual;       // features after the self-attention residual
    Var global_branch;  // cross-attention to the global tokens
    Var local_branch;   // cross-attention to the local tokens, before fusion weighting
    Var out;
};

// Pre-norm block:
//   h   = f + SelfAttn(LN1 f)
//   out = h + Attn(Qg(LN2 h), Kg(c_g), Vg(c_g)) + fusion * Attn(Ql(LN2 h), Kl(c_l), Vl(c_l))
JointAttentionTrace joint_attention_trace(Var features, Var global_cond, Var local_cond, const JointAttentionBlock& b);
Var joint_attention(Var features, Var global_cond, Var local_cond, const JointAttentionBlock& b);

}  // namespace mvt::cond
