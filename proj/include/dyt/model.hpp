// Assembled jet model of U x G for a dynamical r-matrix: invariant field
// jets, the quasi-Poisson bivector, its inverse form, the symplectized
// half-bracket connection and its curvature, and the momentum fields.

#pragma once

#include "dyt/dynr.hpp"

namespace dyt {

struct JetModel {
  const JetContext* ctx = nullptr;
  const LieAlgebraData* L = nullptr;
  DynamicalRMatrix R;

  std::vector<VecJet> left;    // ->e_a
  std::vector<VecJet> right;   // <-e_a
  std::vector<FormJet> coframe;  // theta^a dual to ->e_a

  MultiVecJet pi;       // pi_r as a polyvector
  JetMatrix pi_mat;     // its antisymmetric coefficient matrix
  JetMatrix omega_mat;  // sum_j pi^{ij} omega_{jk} = delta^i_k
  FormJet omega;

  ConnectionJet conn;   // symplectized half-bracket connection
  CurvatureJet curv;    // lowered curvature of conn

  std::vector<VecJet> chi;  // hamiltonian fields of the base coordinates

  int n_coords() const { return ctx->n_base + ctx->n_group; }
};

// Builds everything; throws DegenerateAtBasePoint if pi_r is singular.
JetModel build_jet_model(const JetContext* ctx, const LieAlgebraData* L,
                         DynamicalRMatrix R);

}  // namespace dyt
