#ifndef SDT_H
#define SDT_H
/*
 * C API of the coupled free-flow / porous-medium flow and transport solver.
 *
 * A run wraps one experiment described by a JSON configuration file: parse,
 * solve, write artifacts into an output directory, and evaluate the
 * experiment's built-in acceptance gates.  Handles are opaque; every entry
 * point tolerates NULL and reports problems through status codes and the
 * retained message text instead of throwing across the boundary.
 */

#ifdef __cplusplus
extern "C" {
#endif

/* Status codes returned by sdt_run_execute. */
#define SDT_OK 0          /* run completed and every gate passed */
#define SDT_GATE_FAILED 1 /* run completed but at least one gate failed */
#define SDT_ERROR 2       /* configuration, I/O, or solver error */

typedef struct sdt_run sdt_run;

/* Create a run for the given JSON config file.  out_dir may be NULL (the
 * default is "out"); nonzero quiet suppresses progress on stdout.  Returns
 * NULL only when config_path is NULL or allocation fails; file and config
 * errors surface later from sdt_run_execute. */
sdt_run* sdt_run_create(const char* config_path, const char* out_dir,
                        int quiet);

/* Execute the run and return its status code.  A second call re-runs the
 * experiment. */
int sdt_run_execute(sdt_run* run);

/* Human-readable report: after execution, the collected progress and gate
 * lines, or the error message.  The string is owned by the run and valid
 * until sdt_run_destroy; never NULL. */
const char* sdt_run_message(const sdt_run* run);

/* Release the run.  NULL is a no-op. */
void sdt_run_destroy(sdt_run* run);

/* Library version as "major.minor.patch". */
const char* sdt_version(void);

#ifdef __cplusplus
}
#endif

#endif /* SDT_H */
