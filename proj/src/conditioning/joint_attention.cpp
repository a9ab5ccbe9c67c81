#include "mvtryon/conditioning/joint_attention.hpp"

#include "mvtryon/errors.hpp"
#include "mvtryon/numerics/ops.hpp"

namespace mvt::cond {

void declare_joint_attention(nn::LayerSpec& spec, const std::string& prefix, std::size_t dim, std::size_t global_dim,
                             std::size_t local_dim) {
    spec.layernorm(prefix + ".norm1", dim);
    spec.layernorm(prefix + ".norm2", dim);
    for (const char* p : {".self_q", ".self_k", ".self_v"}) spec.linear(prefix + p, dim, dim, false);
    spec.linear(prefix + ".global_q", dim, dim, false);
    spec.linear(prefix + ".global_k", global_dim, dim, false);
    spec.linear(prefix + ".global_v", global_dim, dim, false);
    spec.linear(prefix + ".local_q", dim, dim, false);
    spec.linear(prefix + ".local_k", local_dim, dim, false);
    spec.linear(prefix + ".local_v", local_dim, dim, false);
    spec.add({prefix + ".fusion", {dim}, nn::Init::Zeros, 0});
}

JointAttentionBlock bind_joint_attention(nn::Binder& bind, const std::string& prefix) {
    auto lin = [&](const char* n) { return nn::bind_linear(bind, prefix + n); };
    return {bind(prefix + ".norm1.gain"),
            bind(prefix + ".norm1.bias"),
            bind(prefix + ".norm2.gain"),
            bind(prefix + ".norm2.bias"),
            lin(".self_q"),
            lin(".self_k"),
            lin(".self_v"),
            lin(".global_q"),
            lin(".global_k"),
            lin(".global_v"),
            lin(".local_q"),
            lin(".local_k"),
            lin(".local_v"),
            bind(prefix + ".fusion")};
}

JointAttentionTrace joint_attention_trace(Var features, Var global_cond, Var local_cond, const JointAttentionBlock& b) {
    if (features.shape().size() != 2) throw DimensionError("joint attention features must be [n x d]");
    const std::size_t d = features.shape()[1];
    if (b.fusion.shape() != Shape{d})
        throw ContractError("fusion vector " + shape_str(b.fusion.shape()) + " does not match feature width " +
                            std::to_string(d));

    Var n1 = layernorm(features, b.norm1_gain, b.norm1_bias);
    Var h = add(features, nn::attention(nn::linear(b.self_q, n1), nn::linear(b.self_k, n1), nn::linear(b.self_v, n1)));

    Var n2 = layernorm(h, b.norm2_gain, b.norm2_bias);
    Var g = nn::attention(nn::linear(b.global_q, n2), nn::linear(b.global_k, global_cond),
                          nn::linear(b.global_v, global_cond));
    Var l = nn::attention(nn::linear(b.local_q, n2), nn::linear(b.local_k, local_cond),
                          nn::linear(b.local_v, local_cond));
    Var out = add(h, add(g, mul_row(l, b.fusion)));
    return {h, g, l, out};
}

Var joint_attention(Var features, Var global_cond, Var local_cond, const JointAttentionBlock& b) {
    return joint_attention_trace(features, global_cond, local_cond, b).out;
}

}  // namespace mvt::cond
