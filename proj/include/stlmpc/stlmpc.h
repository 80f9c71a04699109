/* C interface to the STL-robustness MPC library.
 *
 * Conventions: every fallible call returns stlmpc_status; STLMPC_OK is 0.
 * On failure, stlmpc_last_error() returns a thread-local message describing
 * the most recent failing call on this thread. Objects returned through
 * out-parameters are owned by the caller and released with the matching
 * _free function. Vector arguments are dense double arrays of the
 * documented length; matrices are row-major.
 */
#ifndef STLMPC_H
#define STLMPC_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define STLMPC_API __declspec(dllexport)
#else
#define STLMPC_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum stlmpc_status {
  STLMPC_OK = 0,
  STLMPC_ERR_INVALID_ARGUMENT = 1,
  STLMPC_ERR_PARSE = 2,
  STLMPC_ERR_DIMENSION = 3,
  STLMPC_ERR_UNKNOWN_NAME = 4,
  STLMPC_ERR_IO = 5,
  STLMPC_ERR_NUMERIC = 6,
  STLMPC_ERR_INTERNAL = 7
} stlmpc_status;

STLMPC_API const char* stlmpc_version(void);
STLMPC_API const char* stlmpc_last_error(void);

/* ------------------------------------------------------------------ */
/* STL formulas                                                        */

typedef struct stlmpc_formula stlmpc_formula;

STLMPC_API stlmpc_status stlmpc_formula_parse(const char* text, stlmpc_formula** out);
STLMPC_API void stlmpc_formula_free(stlmpc_formula* f);
/* Canonical text form. Returns the required buffer size (including the NUL)
 * through *needed; copies when buf is large enough. */
STLMPC_API stlmpc_status stlmpc_formula_to_string(const stlmpc_formula* f, char* buf, size_t buflen,
                                                  size_t* needed);

/* ------------------------------------------------------------------ */
/* Traces                                                              */

typedef struct stlmpc_trace stlmpc_trace;

STLMPC_API stlmpc_status stlmpc_trace_create(const char* const* names, size_t dim,
                                             stlmpc_trace** out);
STLMPC_API stlmpc_status stlmpc_trace_append(stlmpc_trace* trace, const double* sample, size_t dim);
STLMPC_API stlmpc_status stlmpc_trace_load_csv(const char* path, stlmpc_trace** out);
STLMPC_API size_t stlmpc_trace_length(const stlmpc_trace* trace);
STLMPC_API size_t stlmpc_trace_dim(const stlmpc_trace* trace);
STLMPC_API void stlmpc_trace_free(stlmpc_trace* trace);

/* Quantitative robustness / Boolean satisfaction at time index t. */
STLMPC_API stlmpc_status stlmpc_robustness(const stlmpc_formula* f, const stlmpc_trace* trace,
                                           size_t t, double* rho_out);
STLMPC_API stlmpc_status stlmpc_satisfies(const stlmpc_formula* f, const stlmpc_trace* trace,
                                          size_t t, int* sat_out);

/* ------------------------------------------------------------------ */
/* Environments                                                        */

typedef struct stlmpc_env stlmpc_env;

/* Known ids: "cartpole", "mountain_car", "acc", "parking". */
STLMPC_API stlmpc_status stlmpc_env_create(const char* env_id, stlmpc_env** out);
STLMPC_API int stlmpc_env_state_dim(const stlmpc_env* env);
STLMPC_API int stlmpc_env_action_dim(const stlmpc_env* env);
/* state_out must hold state_dim doubles. */
STLMPC_API stlmpc_status stlmpc_env_reset(stlmpc_env* env, uint64_t seed, double* state_out);
STLMPC_API stlmpc_status stlmpc_env_step(stlmpc_env* env, const double* state, const double* action,
                                         double* next_state_out, double* reward_out,
                                         int* has_reward_out, int* done_out);
STLMPC_API void stlmpc_env_free(stlmpc_env* env);

/* ------------------------------------------------------------------ */
/* Dynamics models                                                     */

typedef struct stlmpc_model stlmpc_model;

STLMPC_API stlmpc_status stlmpc_model_load(const char* checkpoint_path, stlmpc_model** out);
STLMPC_API int stlmpc_model_state_dim(const stlmpc_model* model);
STLMPC_API int stlmpc_model_action_dim(const stlmpc_model* model);
STLMPC_API stlmpc_status stlmpc_model_forward(const stlmpc_model* model, const double* state,
                                              const double* action, double* next_state_out);
STLMPC_API void stlmpc_model_free(stlmpc_model* model);

/* ------------------------------------------------------------------ */
/* CMA-ES (maximization)                                               */

typedef struct stlmpc_cmaes stlmpc_cmaes;

/* lambda <= 0 picks the default population for the dimension. */
STLMPC_API stlmpc_status stlmpc_cmaes_create(int dim, const double* mean0, double sigma0, int lambda,
                                             uint64_t seed, stlmpc_cmaes** out);
STLMPC_API int stlmpc_cmaes_lambda(const stlmpc_cmaes* opt);
/* candidates_out: lambda x dim, row-major. */
STLMPC_API stlmpc_status stlmpc_cmaes_ask(stlmpc_cmaes* opt, double* candidates_out);
STLMPC_API stlmpc_status stlmpc_cmaes_tell(stlmpc_cmaes* opt, const double* candidates,
                                           const double* fitnesses);
STLMPC_API stlmpc_status stlmpc_cmaes_best(const stlmpc_cmaes* opt, double* x_out, double* f_out);
STLMPC_API void stlmpc_cmaes_free(stlmpc_cmaes* opt);

/* ------------------------------------------------------------------ */
/* Pipeline commands                                                   */

#define STLMPC_PATH_MAX 512

typedef struct stlmpc_collect_options {
  const char* env_id;
  const char* config_path; /* NULL: none */
  int n_traj;              /* <= 0: default */
  int episode_len;         /* <= 0: default */
  uint64_t seed;
  const char* out_path;
} stlmpc_collect_options;

typedef struct stlmpc_collect_result {
  char dataset_path[STLMPC_PATH_MAX];
  char manifest_path[STLMPC_PATH_MAX];
  uint64_t n_transitions;
} stlmpc_collect_result;

STLMPC_API stlmpc_status stlmpc_collect(const stlmpc_collect_options* opts,
                                        stlmpc_collect_result* result);

typedef struct stlmpc_train_options {
  const char* dataset_path;
  const char* config_path;
  const int* hidden;  /* NULL: default */
  size_t n_hidden;
  double learning_rate; /* <= 0: default */
  double momentum;      /* < 0: default */
  int batch_size;       /* <= 0: default */
  int epochs;           /* <= 0: default */
  double split_fraction; /* <= 0: default */
  uint64_t seed;
  const char* out_path;
} stlmpc_train_options;

typedef struct stlmpc_train_result {
  char checkpoint_path[STLMPC_PATH_MAX];
  char loss_curve_path[STLMPC_PATH_MAX];
  char manifest_path[STLMPC_PATH_MAX];
  double final_train_loss;
  double final_val_loss;
  int epochs;
} stlmpc_train_result;

STLMPC_API stlmpc_status stlmpc_train(const stlmpc_train_options* opts,
                                      stlmpc_train_result* result);

typedef struct stlmpc_run_options {
  const char* env_id;
  const char* checkpoint_path;
  const char* spec_text;   /* NULL: default for env */
  const char* config_path;
  int horizon;             /* <= 0: default */
  int n_iter;              /* <= 0: default */
  int n_samples;           /* < 0: default; 0: optimizer default population */
  double sigma0;           /* <= 0: default */
  int action_repeat;       /* <= 0: default; env steps each planned action is held */
  int cold_start;          /* nonzero disables warm start */
  int episodes;
  int max_steps;           /* <= 0: default */
  uint64_t seed;
  const char* out_dir;
  int emit_plot_data;
} stlmpc_run_options;

typedef struct stlmpc_run_result {
  double rho_mean, rho_std;
  double reward_mean, reward_std;
  int has_reward;
  int episodes;
  char out_dir[STLMPC_PATH_MAX];
  char summary_path[STLMPC_PATH_MAX];
  char manifest_path[STLMPC_PATH_MAX];
} stlmpc_run_result;

STLMPC_API stlmpc_status stlmpc_run(const stlmpc_run_options* opts, stlmpc_run_result* result);

typedef struct stlmpc_check_options {
  const char* spec_text; /* exactly one of spec_text / spec_path */
  const char* spec_path;
  const char* trace_path;
} stlmpc_check_options;

typedef struct stlmpc_check_result {
  double rho;
  int sat;
  char canonical_spec[2048];
} stlmpc_check_result;

STLMPC_API stlmpc_status stlmpc_check_spec(const stlmpc_check_options* opts,
                                           stlmpc_check_result* result);

typedef struct stlmpc_bench_options {
  const char* out_dir;
  uint64_t seed;
  int episodes;     /* <= 0: 30 */
  double scale;     /* <= 0: 1.0 */
  const char* const* env_ids; /* NULL: full suite */
  size_t n_env_ids;
} stlmpc_bench_options;

typedef struct stlmpc_bench_result {
  char table_csv_path[STLMPC_PATH_MAX];
  char table_txt_path[STLMPC_PATH_MAX];
  char manifest_path[STLMPC_PATH_MAX];
} stlmpc_bench_result;

STLMPC_API stlmpc_status stlmpc_bench(const stlmpc_bench_options* opts,
                                      stlmpc_bench_result* result);

#ifdef __cplusplus
}
#endif

#endif /* STLMPC_H */
