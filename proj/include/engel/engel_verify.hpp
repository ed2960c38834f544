#pragma once

#include "engel/frame_algebra.hpp"

#include <array>
#include <functional>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace engel {

//! Engel candidate: model plus spanning sections of W in D in E, a section
//! spanning TM/E, and the frame of E/W used for transport.
struct EngelStructure
{
    FrameModel model;
    std::vector<Section> D;
    std::vector<Section> E;
    Section W;
    Section transverse;
    std::array<Section, 2> ew_frame;
    std::string provenance;
    //! Symmetry periods used to recognize closed orbits (0: none).
    Vec deck_period;
    //! Region the W-flow may explore when it is larger than the sampling box
    //! (universal-cover charts of mapping tori).
    std::optional<Domain> flow_domain;
    //! Optional deck normalization applied to orbit points after each step.
    //! D, E, W and ew_frame must be equivariant under it, so transported
    //! frame coordinates carry over unchanged.
    std::function<Vec(Vec const&)> deck_wrap;

    Domain const& flow_region() const
    {
        return flow_domain ? *flow_domain : model.domain();
    }

    int dim() const { return model.dim(); }
};

struct PointRecord
{
    Vec point;
    int rank_D = 0;
    int rank_E = 0;
    int rank_EE = 0;
    bool e_consistent = false;  //!< declared E equals D + [D,D]
    double cauchy_angle_error = -1; //!< -1 when not computed
    double w_in_D_error = -1;
    bool marginal = false;
    bool pass = false;
};

struct VerificationReport
{
    std::string provenance;
    std::vector<PointRecord> points;
    Tolerances tol;
    bool pass = false;
    bool cauchy_pass = false;
    std::size_t n_pass = 0;
    std::size_t n_marginal = 0;
    double max_cauchy_angle_error = 0;
    double max_w_in_D_error = 0;
};

struct VerifyOptions
{
    Tolerances tol;
    std::uint64_t seed = 20240501;
    bool cauchy = true;
};

//! Ranks (D, [D,D], [E,E]) and Cauchy-line checks at quasi-random points.
VerificationReport verify_engel(EngelStructure const& s, std::size_t n_samples,
                                VerifyOptions const& opt = {});
//! Serial reference of verify_engel; identical output.
VerificationReport verify_engel_serial(EngelStructure const& s, std::size_t n_samples,
                                       VerifyOptions const& opt = {});
PointRecord verify_point(EngelStructure const& s, Vec const& p,
                         VerifyOptions const& opt);

//! Kernel line of the skew pairing E x E -> TM/E at p, unit length and
//! oriented along the declared W section.
Vec cauchy_characteristic(EngelStructure const& s, Vec const& p, double tol = 1e-8,
                          double h = 1e-5);
//! Same computation with caller-supplied E sections (for recombination tests).
Vec cauchy_characteristic(EngelStructure const& s, std::vector<Section> const& E,
                          Vec const& p, double tol = 1e-8, double h = 1e-5);

//! Matrix with the sections evaluated at p as columns.
Mat evaluate(EngelStructure const& s, std::vector<Section> const& secs, Vec const& p);

EngelStructure darboux_standard();
EngelStructure darboux_long();
//! Integrable plane field with E declared as its own span.
EngelStructure integrable_counterexample();

}  // namespace engel
