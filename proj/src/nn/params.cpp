#include "mvtryon/nn/params.hpp"

#include <cmath>
#include <random>

#include "mvtryon/errors.hpp"

namespace mvt::nn {

void LayerSpec::linear(const std::string& name, std::size_t in, std::size_t out, bool bias) {
    add({name + ".weight", {out, in}, Init::Uniform, in});
    if (bias) add({name + ".bias", {out}, Init::Zeros, 0});
}

void LayerSpec::conv(const std::string& name, std::size_t cin, std::size_t cout, std::size_t k, bool bias) {
    add({name + ".weight", {cout, cin, k, k}, Init::Uniform, cin * k * k});
    if (bias) add({name + ".bias", {cout}, Init::Zeros, 0});
}

void LayerSpec::layernorm(const std::string& name, std::size_t d) {
    add({name + ".gain", {d}, Init::Ones, 0});
    add({name + ".bias", {d}, Init::Zeros, 0});
}

Tensor& ParamStore::add(const std::string& name, Tensor value) {
    if (params_.count(name)) throw ContractError("duplicate parameter name '" + name + "'");
    value.set_requires_grad(true);
    return params_.emplace(name, std::move(value)).first->second;
}

Tensor& ParamStore::get(const std::string& name) {
    auto it = params_.find(name);
    if (it == params_.end()) throw ContractError("unknown parameter '" + name + "'");
    return it->second;
}

const Tensor& ParamStore::get(const std::string& name) const {
    auto it = params_.find(name);
    if (it == params_.end()) throw ContractError("unknown parameter '" + name + "'");
    return it->second;
}

std::size_t ParamStore::total_elements() const {
    std::size_t n = 0;
    for (const auto& [_, t] : params_) n += t.numel();
    return n;
}

void ParamStore::zero_grad() {
    for (auto& [_, t] : params_) t.clear_grad();
}

std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b) {
    // splitmix64 finalizer over the combined words
    std::uint64_t z = a + 0x9e3779b97f4a7c15ULL * (b + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

std::uint64_t hash_name(const std::string& name) {
    std::uint64_t h = 0xcbf29ce484222325ULL;  // FNV-1a
    for (unsigned char c : name) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

ParamStore init_params(const LayerSpec& spec, std::uint64_t seed) {
    ParamStore store(seed);
    for (const ParamSpec& p : spec.params()) {
        Tensor t(p.shape);
        switch (p.init) {
            case Init::Zeros:
                break;
            case Init::Ones:
                for (auto& v : t.storage()) v = 1.0;
                break;
            case Init::Uniform: {
                if (p.fan_in == 0) throw ContractError("parameter '" + p.name + "' declares zero fan-in");
                const double bound = 1.0 / std::sqrt(static_cast<double>(p.fan_in));
                std::mt19937_64 rng(mix_seed(seed, hash_name(p.name)));
                std::uniform_real_distribution<double> dist(-bound, bound);
                for (auto& v : t.storage()) v = dist(rng);
                break;
            }
        }
        store.add(p.name, std::move(t));
    }
    return store;
}

Var Binder::operator()(const std::string& name) {
    auto it = bound_.find(name);
    if (it != bound_.end()) return it->second;
    Tensor& p = store_.get(name);
    Var v = frozen_ ? tape_.constant(Tensor(p.shape(), p.storage())) : tape_.leaf(p);
    bound_.emplace(name, v);
    return v;
}

}  // namespace mvt::nn
