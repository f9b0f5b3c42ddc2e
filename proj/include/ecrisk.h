/* C interface to the ecrisk extreme conditional risk library. */
#ifndef ECRISK_H
#define ECRISK_H

#include <stddef.h>
#include <stdint.h>

#if defined(ECRISK_BUILDING)
#define ECRISK_API __attribute__((visibility("default")))
#else
#define ECRISK_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum ecr_status {
  ECR_OK = 0,
  ECR_ERR_DOMAIN = 1,   /* precondition or estimator failure */
  ECR_ERR_IO = 2,       /* unreadable file, malformed CSV or JSON */
  ECR_ERR_ARGUMENT = 3, /* null pointer or invalid handle */
  ECR_ERR_INTERNAL = 4
} ecr_status;

typedef struct ecr_model ecr_model;
typedef struct ecr_sample ecr_sample;

/* Message of the last failure on the calling thread; never NULL. */
ECRISK_API const char* ecr_last_error(void);
ECRISK_API const char* ecr_version(void);
/* Releases strings returned through char** out-parameters. */
ECRISK_API void ecr_string_free(char* text);

/* Models: {"family": "student", "nu": 2, "mu": [...], "sigma": [[...]]}. */
ECRISK_API ecr_status ecr_model_from_json(const char* json, ecr_model** out);
ECRISK_API ecr_status ecr_model_load(const char* path, ecr_model** out);
ECRISK_API ecr_status ecr_model_to_json(const ecr_model* model, char** out);
ECRISK_API ecr_status ecr_model_dimension(const ecr_model* model, size_t* out);
ECRISK_API void ecr_model_free(ecr_model* model);

/* Samples: row-major n x d matrices. */
ECRISK_API ecr_status ecr_sample_draw(const ecr_model* model, size_t n, uint64_t seed, ecr_sample** out);
ECRISK_API ecr_status ecr_sample_from_data(size_t rows, size_t cols, const double* data, ecr_sample** out);
ECRISK_API ecr_status ecr_sample_read_csv(const char* path, ecr_sample** out);
ECRISK_API ecr_status ecr_sample_write_csv(const ecr_sample* sample, const char* path);
ECRISK_API ecr_status ecr_sample_shape(const ecr_sample* sample, size_t* rows, size_t* cols);
/* Borrowed pointer, valid until the sample is freed. */
ECRISK_API ecr_status ecr_sample_data(const ecr_sample* sample, const double** data);
ECRISK_API void ecr_sample_free(ecr_sample* sample);

/* Elliptical core. */
ECRISK_API ecr_status ecr_mahalanobis(const ecr_model* covariates, const double* x, size_t len, double* out);
ECRISK_API ecr_status ecr_conditional_moments(const ecr_model* joint, const double* x, size_t len,
                                              double* mu_cond, double* sigma_cond, double* m_x);

/* Extremal estimation. */
ECRISK_API ecr_status ecr_hill(const double* w, size_t n, size_t k, double* out);

/* Full estimation on a sample whose columns are (covariates..., response).
   options: {"x": [...], "schedule": {"a","b","c","rho","gamma_ref"}, "kernel",
   "regime": "high" | "intermediate", "measures": ["quantile", "lp:2", "hg:1"]}.
   Output: {"config", "conditional", "extremal", "conditions", "estimates"}. */
ECRISK_API ecr_status ecr_estimate(const ecr_model* joint, const ecr_sample* sample, const char* options_json,
                                   char** out_json);
ECRISK_API ecr_status ecr_check_conditions(const char* schedule_json, char** out_json);

/* Risk measure factors. */
ECRISK_API ecr_status ecr_conditional_tail_index(double gamma, size_t N, double* out);
ECRISK_API ecr_status ecr_f_l(double gamma, double p, double* out);
ECRISK_API ecr_status ecr_f_h(double gamma, double p, double* out);

/* Oracles. */
ECRISK_API ecr_status ecr_table1(const char* family_json, size_t N, double m_x, double* eta, double* ell);
ECRISK_API ecr_status ecr_generator_value(const char* family_json, size_t N, double t, double* out);
ECRISK_API ecr_status ecr_student_conditional_quantile(double nu, size_t N, double m_x, double tail, double* out);
ECRISK_API ecr_status ecr_student_conditional_tvar(double nu, size_t N, double m_x, double tail, double* out);
ECRISK_API ecr_status ecr_student_numeric_lp(double nu, size_t N, double m_x, double alpha, double p, double* out);
ECRISK_API ecr_status ecr_student_numeric_hg(double nu, size_t N, double m_x, double alpha, double p, double* out);
ECRISK_API ecr_status ecr_asymptotic_variances(double gamma, size_t N, double theta, double* intermediate,
                                               double* high);

/* Experiments: config as documented in the README; report JSON and tidy CSV. */
ECRISK_API ecr_status ecr_montecarlo(const char* config_json, char** report_json, char** records_csv);

/* Real-data pipeline on a returns CSV.
   options: {"covariates": [...], "target", "b", "c", "a", "rho", "kernel", "measures", "x"}. */
ECRISK_API ecr_status ecr_real_data(const char* path, const char* options_json, char** out_json);

#ifdef __cplusplus
}
#endif

#endif
