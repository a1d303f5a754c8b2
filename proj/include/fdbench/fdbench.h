/* C interface to the feature-density benchmark.
 *
 * Every call returns an fdb_status. On failure, fdb_last_error() returns a
 * message for the calling thread; it stays valid until that thread's next
 * call into the library. Strings returned through `const char**` out
 * parameters are owned by the handle and stay valid until the next call on
 * the same handle or fdb_experiment_free.
 *
 * A handle may be used from one thread at a time; distinct handles are
 * independent.
 */
#ifndef FDBENCH_FDBENCH_H
#define FDBENCH_FDBENCH_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define FDB_API __declspec(dllexport)
#else
#define FDB_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum fdb_status {
  FDB_OK = 0,
  FDB_ERR_CONFIG = 1,
  FDB_ERR_DATA = 2,
  FDB_ERR_RUNTIME = 3,
  FDB_ERR_INVALID_ARGUMENT = 4
} fdb_status;

typedef struct fdb_experiment fdb_experiment;

/* Called once per finished fold cell; reused is 1 when the cell came from a
 * persisted result instead of training. */
typedef void (*fdb_progress_fn)(const char* variant, const char* family, size_t fold, int smote,
                                int reused, double f1, void* user);

FDB_API const char* fdb_version(void);
FDB_API const char* fdb_last_error(void);

/* config_path may be NULL (all defaults). overrides_json may be NULL or a
 * JSON object with config keys; overrides win. Relative paths in the file
 * resolve against its directory, those in overrides against the working
 * directory. */
FDB_API fdb_status fdb_experiment_open(const char* config_path, const char* overrides_json,
                                       fdb_experiment** out);
FDB_API void fdb_experiment_free(fdb_experiment* exp);

/* Canonical JSON of the effective configuration. */
FDB_API fdb_status fdb_experiment_config(fdb_experiment* exp, const char** json_out);
/* SHA-256 hex digest of the result-relevant configuration. */
FDB_API fdb_status fdb_experiment_hash(fdb_experiment* exp, const char** hex_out);

/* Stages. Each writes its artifacts under the configured output directory
 * and returns a JSON summary.
 *   ingest    corpus.csv
 *   variants  variants/<VARIANT>.txt
 *   density   density.csv, density_nopunct.csv
 *   run       cells/<hash>/..., then the full report
 *   correlate correlations.csv, ttests.csv from density and metrics CSVs
 *             (NULL paths mean the ones in the output directory)
 *   report    re-renders the report from the CSVs in the output directory */
FDB_API fdb_status fdb_ingest(fdb_experiment* exp, const char** summary_json);
FDB_API fdb_status fdb_variants(fdb_experiment* exp, const char** summary_json);
FDB_API fdb_status fdb_density(fdb_experiment* exp, const char** summary_json);
FDB_API fdb_status fdb_run(fdb_experiment* exp, fdb_progress_fn progress, void* user,
                           const char** summary_json);
FDB_API fdb_status fdb_correlate(fdb_experiment* exp, const char* density_csv,
                                 const char* metrics_csv, const char** summary_json);
FDB_API fdb_status fdb_report(fdb_experiment* exp, const char** summary_json);

/* Stateless helpers. */
FDB_API fdb_status fdb_feature_density(uint64_t unique, uint64_t all, double* fd);
FDB_API fdb_status fdb_pearson(const double* x, const double* y, size_t n, double* rho,
                               double* p_two_sided);
/* Two-sided p-value of a correlation coefficient over n pairs. */
FDB_API fdb_status fdb_pearson_p(double rho, size_t n, double* p_two_sided);

#ifdef __cplusplus
}
#endif

#endif /* FDBENCH_FDBENCH_H */
