#ifndef LICSQ_H
#define LICSQ_H

/* Generated by cbindgen from src/lib.rs; do not edit. */

#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>

/**
 * Number of register levels addressable by [`licsq_register_amplitude`].
 */
#define LICSQ_REGISTER_LEVELS 24

typedef enum LicsqLineModel {
  LICSQ_LINE_MODEL_DOMINANT_LINE = 0,
  LICSQ_LINE_MODEL_FINE_STRUCTURE = 1,
} LicsqLineModel;

typedef enum LicsqQubit {
  LICSQ_QUBIT_CS = 0,
  LICSQ_QUBIT_LI_A = 1,
  LICSQ_QUBIT_LI_B = 2,
} LicsqQubit;

typedef enum LicsqStatus {
  LICSQ_STATUS_OK = 0,
  LICSQ_STATUS_NULL_POINTER = 1,
  LICSQ_STATUS_INVALID_ARGUMENT = 2,
  LICSQ_STATUS_UNKNOWN_SPECIES = 3,
  LICSQ_STATUS_REGIME = 4,
  LICSQ_STATUS_INFEASIBLE = 5,
  LICSQ_STATUS_PRECONDITION = 6,
  LICSQ_STATUS_INSUFFICIENT_DATA = 7,
  LICSQ_STATUS_PARSE = 8,
  LICSQ_STATUS_IO = 9,
  LICSQ_STATUS_NUMERICAL = 10,
  LICSQ_STATUS_PANIC = 11,
} LicsqStatus;

typedef enum LicsqStep {
  LICSQ_STEP_CREATE = 0,
  LICSQ_STEP_SWAP = 1,
} LicsqStep;

typedef struct LicsqLattice LicsqLattice;

typedef struct LicsqRegister LicsqRegister;

typedef struct LicsqSpecies LicsqSpecies;

typedef struct LicsqTransport LicsqTransport;

/**
 * Gate budget in SI units (rad/s, s, m).
 */
typedef struct LicsqGateBudget {
  double franck_condon;
  double franck_condon_quadrature;
  double rabi;
  double pulse_pair_time;
  double overlap_fidelity;
  double overlap_fidelity_3axis;
  double leakage;
  double vib_detuning;
  double r0;
} LicsqGateBudget;

typedef struct LicsqFeasibilityPoint {
  double alpha;
  bool independent_control_ok;
  bool li_tunneling_ok;
  bool cs_tunneling_ok;
  bool li_scattering_ok;
  bool cs_scattering_ok;
  bool feasible;
} LicsqFeasibilityPoint;

typedef struct LicsqFidelityReport {
  double multiplicative;
  double register_fidelity;
  double monte_carlo;
  double monte_carlo_sigma;
} LicsqFidelityReport;

typedef struct LicsqStabilitySummary {
  double rms1_nm;
  double rms2_nm;
  double rms_diff_nm;
  size_t samples;
  double duration_s;
  bool spectrum_computed;
  /**
   * NaN when no spectrum was computed.
   */
  double parseval_error_max;
} LicsqStabilitySummary;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failed call on this thread, or null. Valid until the
 * next failing call on the same thread.
 */
const char *licsq_last_error(void);

/**
 * Library version as a static NUL-terminated string.
 */
const char *licsq_version(void);

/**
 * Looks up `"Li6"` or `"Cs133"`.
 */
enum LicsqStatus licsq_species_new(const char *name, struct LicsqSpecies **out);

void licsq_species_free(struct LicsqSpecies *species);

enum LicsqStatus licsq_species_mass_kg(const struct LicsqSpecies *species, double *out);

/**
 * Vector light-shift constant `D_FS` in light of `wavelength_m`.
 */
enum LicsqStatus licsq_species_dfs(const struct LicsqSpecies *species,
                                   double wavelength_m,
                                   double *out);

/**
 * Budget for scattering length `a`, free Rabi rate `rabi_free`, pair offset
 * `offset` and a relative trap given as `(omega_rel, r0)`. A non-positive
 * `vib_detuning` selects `omega_rel`.
 */
enum LicsqStatus licsq_gate_budget(double scattering_length,
                                   double rabi_free,
                                   double offset,
                                   double omega_rel,
                                   double r0,
                                   double reduced_mass,
                                   double vib_detuning,
                                   struct LicsqGateBudget *out);

/**
 * Reference Cs transport parameters, optionally calibrated to 1 % error at
 * reduced velocity 0.03 over one site.
 */
enum LicsqStatus licsq_transport_reference(bool calibrated, struct LicsqTransport **out);

/**
 * Raw parameters: spacing (m), oscillator length (m), trap frequency
 * (rad/s), cross-talk factor, cross-talk depth (J).
 */
enum LicsqStatus licsq_transport_new(double spacing,
                                     double oscillator_length,
                                     double trap_frequency,
                                     double alpha,
                                     double cross_talk_depth,
                                     struct LicsqTransport **out);

void licsq_transport_free(struct LicsqTransport *transport);

/**
 * Re-anchors the depth factor so that `error` is reached at
 * `reduced_velocity` over `sites`.
 */
enum LicsqStatus licsq_transport_calibrate(struct LicsqTransport *transport,
                                           uint32_t sites,
                                           double reduced_velocity,
                                           double error);

enum LicsqStatus licsq_transport_error(const struct LicsqTransport *transport,
                                       uint32_t sites,
                                       double reduced_velocity,
                                       double *out);

/**
 * Largest velocity (m/s) keeping the transport fidelity at `fidelity_target`.
 */
enum LicsqStatus licsq_transport_max_velocity(const struct LicsqTransport *transport,
                                              uint32_t sites,
                                              double fidelity_target,
                                              double *out);

/**
 * Entanglement time for transport over `sites`, s.
 */
double licsq_entangle_time(uint32_t sites);

/**
 * Qubits reachable within `sites` lattice constants.
 */
double licsq_qubit_reach(uint32_t sites);

/**
 * Sites traversed between `(i1, j1)` and `(i2, j2)` on the triangular lattice.
 */
uint64_t licsq_site_distance(int64_t i1, int64_t j1, int64_t i2, int64_t j2);

/**
 * 1.5 µm lattice, 681 nm for Li and 1064 nm for Cs.
 */
enum LicsqStatus licsq_lattice_standard(enum LicsqLineModel model, struct LicsqLattice **out);

void licsq_lattice_free(struct LicsqLattice *lattice);

/**
 * Intensity ratio `I1/I2` with equal cross-talk for both species, and that
 * cross-talk factor.
 */
enum LicsqStatus licsq_lattice_balanced_ratio(const struct LicsqLattice *lattice,
                                              double *ratio,
                                              double *alpha);

/**
 * Evaluates one operating point; intensities in W/m², ceiling in 1/s.
 */
enum LicsqStatus licsq_lattice_evaluate(const struct LicsqLattice *lattice,
                                        double i1,
                                        double i2,
                                        double decoherence_ceiling,
                                        double alpha_max,
                                        struct LicsqFeasibilityPoint *out);

/**
 * `(|000⟩ + |100⟩)/√2`: messenger in superposition, both Li qubits in 0.
 */
enum LicsqStatus licsq_register_initial(struct LicsqRegister **out);

void licsq_register_free(struct LicsqRegister *register_);

/**
 * Applies an ideal create or swap step in place.
 */
enum LicsqStatus licsq_register_step(struct LicsqRegister *register_, enum LicsqStep step);

/**
 * Moves the messenger, losing population `transport_error`.
 */
enum LicsqStatus licsq_register_transport(struct LicsqRegister *register_, double transport_error);

/**
 * Amplitude of level `index`. Indices 0–7 are the qubit levels `|Cs Li_a Li_b⟩`
 * in binary order; 8 + 8·m + 2·p + s is molecular level `m` (0 or 1) formed
 * with Li qubit `p` (0 = a, 1 = b) and spectator state `s`. Padding slots
 * (offsets 4–7 within each molecular block) are rejected.
 */
enum LicsqStatus licsq_register_amplitude(const struct LicsqRegister *register_,
                                          size_t index,
                                          double *re,
                                          double *im);

/**
 * Fidelity with `−(|010⟩ + |001⟩)/√2`.
 */
enum LicsqStatus licsq_register_final_fidelity(const struct LicsqRegister *register_, double *out);

enum LicsqStatus licsq_register_concurrence(const struct LicsqRegister *register_,
                                            enum LicsqQubit first,
                                            enum LicsqQubit second,
                                            double *out);

enum LicsqStatus licsq_register_purity(const struct LicsqRegister *register_,
                                       enum LicsqQubit qubit,
                                       double *out);

/**
 * Full create–transport–swap sequence with the same overlap fidelity and
 * leakage on each of the four pulses.
 */
enum LicsqStatus licsq_protocol_fidelity(double overlap_fidelity,
                                         double leakage,
                                         double transport_error,
                                         size_t trials,
                                         uint64_t seed,
                                         struct LicsqFidelityReport *out);

/**
 * Reads a position CSV (`t_s,x1_nm,y1_nm,x2_nm,y2_nm`) and summarizes it.
 */
enum LicsqStatus licsq_stability_analyze_csv(const char *path, struct LicsqStabilitySummary *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* LICSQ_H */
