#ifndef FLOWCELL_FLOWCELL_H
#define FLOWCELL_FLOWCELL_H

/* C interface to the flowcell library. Every call returns an fc_status;
 * on failure fc_last_error() describes the problem for the calling thread. */

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define FC_API __declspec(dllexport)
#else
#define FC_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum fc_status {
  FC_OK = 0,
  FC_ERR_CONFIG = 1,     /* bad config text, bad flow matrix, unusable file */
  FC_ERR_NUMERIC = 2,    /* verification failure or other numerical error */
  FC_ERR_DEGENERATE = 3, /* cell grid too coarse for its stencil */
  FC_ERR_ARGUMENT = 4,   /* invalid argument to an API call */
  FC_ERR_IO = 5,
  FC_ERR_INTERNAL = 6
} fc_status;

typedef enum fc_strategy {
  FC_STRATEGY_DS = 0,
  FC_STRATEGY_DO = 1,
  FC_STRATEGY_BOTH = 2,
  FC_STRATEGY_ALL_PAIRS = 3
} fc_strategy;

typedef struct fc_config fc_config;
typedef struct fc_simulation fc_simulation;

typedef struct fc_summary {
  uint64_t samples;
  uint64_t remaps;
  double d_cut;
  double mean_eff_ds;
  double mean_eff_do;
  double mean_v_ds;
  double mean_v_do;
  double wall_ds;
  double wall_do;
  double wall_ratio;
  double predicted_ratio;
  double measured_eff_ds;
  double measured_eff_do;
  double max_aspect;
  double max_deviation;
} fc_summary;

FC_API const char* fc_last_error(void);
FC_API const char* fc_version(void);

/* Configuration. Strings use the key = value grammar of config files. */
FC_API fc_status fc_config_new(fc_config** out);
FC_API fc_status fc_config_parse_string(const char* text, fc_config** out);
FC_API fc_status fc_config_parse_file(const char* path, fc_config** out);
FC_API fc_status fc_config_set(fc_config* cfg, const char* key, const char* value);
FC_API fc_status fc_config_set_steps(fc_config* cfg, uint64_t n_steps);
FC_API fc_status fc_config_set_strategy(fc_config* cfg, fc_strategy strategy);
FC_API fc_status fc_config_set_seed(fc_config* cfg, uint64_t seed);
FC_API fc_status fc_config_set_output(fc_config* cfg, const char* path);
FC_API void fc_config_free(fc_config* cfg);

/* Commands. Each writes its CSV trace to the configured output path (if
 * any) and fills `summary` when non-null. `report`, when non-null, receives
 * the summary table as a NUL-terminated string truncated to report_len. */
FC_API fc_status fc_run_simulate(const fc_config* cfg, fc_summary* summary, char* report, size_t report_len);
FC_API fc_status fc_run_compare(const fc_config* cfg, fc_summary* summary, char* report, size_t report_len);
FC_API fc_status fc_run_verify(const fc_config* cfg, fc_summary* summary, char* report, size_t report_len);
FC_API fc_status fc_run_bench(const fc_config* cfg, fc_summary* summary, char* report, size_t report_len);

/* Step-by-step access to one trajectory. */
FC_API fc_status fc_simulation_create(const fc_config* cfg, fc_strategy strategy, fc_simulation** out);
FC_API fc_status fc_simulation_step(fc_simulation* sim, uint64_t n_steps);
FC_API size_t fc_simulation_size(const fc_simulation* sim);
FC_API double fc_simulation_time(const fc_simulation* sim);
FC_API fc_status fc_simulation_positions(const fc_simulation* sim, double* xyz);
FC_API fc_status fc_simulation_forces(const fc_simulation* sim, double* xyz);
FC_API fc_status fc_simulation_basis(const fc_simulation* sim, double basis[9]);
FC_API fc_status fc_simulation_energy(const fc_simulation* sim, double* potential, double* kinetic);
FC_API void fc_simulation_free(fc_simulation* sim);

/* Geometry. Matrices are row-major with the box edges as columns. */
FC_API fc_status fc_evolve_basis(const double l0[9], const double flow[9], double t, double out[9]);
FC_API fc_status fc_box_heights(const double basis[9], double heights[3]);
FC_API fc_status fc_reduce_basis(const double basis[9], double out[9], int64_t transform[9]);
FC_API fc_status fc_neighborhood_volumes(const double basis[9], double d_cut, double* v_ds, double* v_do_avg);
FC_API double fc_avg_neighborhood_count(int l1, int l2, int l3);
FC_API double fc_search_efficiency(double v_neighborhood, double d_cut);
FC_API double fc_normalize_cutoff(void);

/* WCA forces for n wrapped positions. */
FC_API fc_status fc_compute_forces(const double basis[9], size_t n, const double* xyz, fc_strategy strategy,
                                   double epsilon, double sigma, double* forces, double* energy,
                                   uint64_t* pair_checks);

#ifdef __cplusplus
}
#endif

#endif
