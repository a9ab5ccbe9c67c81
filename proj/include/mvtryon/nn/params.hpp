#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <unordered_map>
#include <vector>

#include "mvtryon/numerics/tape.hpp"

namespace mvt::nn {

enum class Init { Uniform, Zeros, Ones };

struct ParamSpec {
    std::string name;
    Shape shape;
    Init init = Init::Uniform;
    std::size_t fan_in = 0;  // Uniform only; bounds are +-1/sqrt(fan_in)
};

// Ordered list of parameter declarations, built up by the model modules.
class LayerSpec {
   public:
    void add(ParamSpec p) { params_.push_back(std::move(p)); }
    void linear(const std::string& name, std::size_t in, std::size_t out, bool bias = true);
    void conv(const std::string& name, std::size_t cin, std::size_t cout, std::size_t k, bool bias = true);
    void layernorm(const std::string& name, std::size_t d);

    const std::vector<ParamSpec>& params() const { return params_; }

   private:
    std::vector<ParamSpec> params_;
};

// Named trainable tensors. Names are hierarchical ("unet.dec0.attn.q.weight").
class ParamStore {
   public:
    explicit ParamStore(std::uint64_t seed = 0) : seed_(seed) {}

    // Throws ContractError if the name exists. Marks the tensor requires_grad.
    Tensor& add(const std::string& name, Tensor value);
    Tensor& get(const std::string& name);
    const Tensor& get(const std::string& name) const;
    bool contains(const std::string& name) const { return params_.count(name) != 0; }

    std::size_t size() const { return params_.size(); }
    std::size_t total_elements() const;
    std::uint64_t seed() const { return seed_; }

    void zero_grad();

    auto begin() { return params_.begin(); }
    auto end() { return params_.end(); }
    auto begin() const { return params_.begin(); }
    auto end() const { return params_.end(); }

    friend bool operator==(const ParamStore& a, const ParamStore& b) { return a.params_ == b.params_; }

   private:
    std::uint64_t seed_;
    std::map<std::string, Tensor> params_;
};

// Per-parameter stream seeded from (seed, name), so a parameter's initial
// value does not depend on which other parameters exist.
ParamStore init_params(const LayerSpec& spec, std::uint64_t seed);

std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b);
std::uint64_t hash_name(const std::string& name);

// Binds store entries onto one tape, once each. With `frozen` the values enter
// as constants and never accumulate gradient.
class Binder {
   public:
    Binder(Tape& tape, ParamStore& store, bool frozen = false) : tape_(tape), store_(store), frozen_(frozen) {}

    Var operator()(const std::string& name);
    Tape& tape() { return tape_; }
    const ParamStore& store() const { return store_; }
    bool has(const std::string& name) const { return store_.contains(name); }

   private:
    Tape& tape_;
    ParamStore& store_;
    bool frozen_;
    std::unordered_map<std::string, Var> bound_;
};

}  // namespace mvt::nn
