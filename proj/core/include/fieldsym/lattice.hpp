#pragma once

#include <map>

#include "fieldsym/model.hpp"

namespace fieldsym {

/// One-dimensional periodic lattice at desk scale. The model's internal
/// structure is kept intact; spacetime contractions are restricted to the
/// retained direction with the model's metric signature.
struct LatticeSpec {
    int sites = 16;
    double spacing = 1.0;
};

/// Discretized action: a direct transcription of the density with central
/// differences, summed over sites and scaled by the spacing. Derivatives of
/// the action are taken by central finite differences with the cube-root-
/// of-epsilon step rule, fully independent of the symbolic differentiation
/// path.
class LatticeAction {
  public:
    LatticeAction(const ModelDef& m, const LatticeSpec& spec,
                  const std::map<std::string, double>& params);

    int sites() const { return spec_.sites; }
    int components() const { return static_cast<int>(labels_.size()); }
    int dof() const { return sites() * components(); }
    double spacing() const { return spec_.spacing; }
    const std::vector<std::string>& component_names() const { return labels_; }
    const Space& lattice_space() const { return lattice_space_; }

    int index_of(int site, int component) const { return site * components() + component; }

    std::vector<double> constant_config(const VacuumConfig& v) const;

    /// Compiled fast path.
    double action(const std::vector<double>& config) const;
    /// Independent slow path through the generic numeric evaluator.
    double action_reference(const std::vector<double>& config) const;

    std::vector<double> gradient(const std::vector<double>& config) const;
    double gradient_max(const std::vector<double>& config) const;
    /// Row-major dof x dof matrix, symmetrized.
    std::vector<double> hessian(const std::vector<double>& config) const;

    /// (1/(a N)) sum over site pairs of the Hessian: the constant-mode
    /// quadratic form per unit volume. For a T - V density this equals
    /// minus the potential Hessian.
    std::vector<double> constant_mode_block(const std::vector<double>& hessian) const;

    /// Central-difference jet of one component at a site (order 0, 1, 2).
    double jet(const std::vector<double>& config, int site, int component, int order) const;

    const ModelDef& model() const { return model_; }

  private:
    struct CompiledPoly;
    struct CompiledTerm {
        double coeff = 1.0;
        std::vector<std::pair<int, int>> jets;  // (slot, power)
        std::vector<CompiledPoly> exp_args;
    };
    struct CompiledPoly {
        std::vector<CompiledTerm> terms;
    };

    double eval_poly(const CompiledPoly& poly, const std::vector<double>& jets) const;
    CompiledPoly compile(const ExprPtr& e) const;

    ModelDef model_;
    LatticeSpec spec_;
    Space lattice_space_;
    std::map<std::string, double> params_;
    std::vector<std::string> labels_;
    std::map<std::string, int> component_index_;  // "phi[1]" -> flat component
    CompiledPoly density_;
    ExprPtr expanded_density_ = zero();
};

struct GoldstoneCheckOptions {
    bool allow_nonsolution = false;
    double solution_tolerance = 1e-6;
};

struct GoldstoneCheck {
    double gradient_max = 0.0;
    double hessian_norm = 0.0;   // infinity norm
    double residual_norm = 0.0;  // infinity norm of H . Delta
    double residual = 0.0;       // ratio of the two
};

/// Contract the finite-difference action Hessian with the transformation
/// direction evaluated site-wise (explicit coordinates use site index times
/// spacing; the gauge function is instantiated as a fixed smooth periodic
/// wave whose lattice derivatives are central differences of its samples).
/// Throws NotASolution when the configuration fails the discrete equations
/// of motion and `allow_nonsolution` is not set.
GoldstoneCheck check_generalized_goldstone(const ModelDef& m, const Transformation& t,
                                           const VacuumConfig& v, const LatticeSpec& spec,
                                           const GoldstoneCheckOptions& opts = {});

}  // namespace fieldsym
