// Noiseless QKS-U and QKS-H on a 4-site transverse-field Ising chain:
// energy error and overlap condition number per Krylov iteration.
#include <cstdio>

#include "qkrylov/qkrylov.hpp"

int main() {
  using namespace qkrylov;
  const System sys("tfim_chain(4,1,1)", model_hamiltonian(ModelKind::tfim_chain, 4));
  std::printf("exact ground energy %.12f, ||H|| = %.6f\n", sys.exact_energy(), sys.norm());

  const Strategy plain{RegularizationSpec::none(), FilterMode::metric_only};
  const Strategy fixed{RegularizationSpec::fixed(1e-6), FilterMode::metric_only};

  for (Variant v : {Variant::qks_u, Variant::qks_h}) {
    KrylovSpace space({single_reference(sys.ground().state, sys.n_qubits())}, sys.data(),
                      default_config(v, sys.norm()));
    space.grow_to(12);
    std::printf("\n%s   K   |E-E0| (none)   kappa(S)     |E-E0| (sigma=1e-6)\n", to_string(v).c_str());
    for (std::size_t K = 0; K <= 12; ++K) {
      const auto m = space.matrices(K);
      const auto a = evaluate(m, sys, plain, 0.0, std::nullopt).record;
      const auto b = evaluate(m, sys, fixed, 0.0, std::nullopt).record;
      std::printf("        %2zu  %.3e       %.3e    %.3e\n", K, a.abs_error.value_or(-1.0),
                  a.kappa_pre, b.abs_error.value_or(-1.0));
    }
  }
  return 0;
}
