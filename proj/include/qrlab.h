/* C interface to the qrlab core. All functions return a status code; on
 * failure qrlab_last_error() carries a thread-local message. Strings returned
 * through out-parameters are heap-allocated and released with
 * qrlab_free_string(). */
#ifndef QRLAB_H
#define QRLAB_H

#ifdef __cplusplus
extern "C" {
#endif

typedef struct qrlab_map qrlab_map; /* opaque */

typedef enum {
    QRLAB_OK = 0,
    QRLAB_ERR_PARSE,
    QRLAB_ERR_UNDECLARED_PARAMETER,
    QRLAB_ERR_NON_REAL_GUARD,
    QRLAB_ERR_OUT_OF_DOMAIN,
    QRLAB_ERR_GUARD_GAP,
    QRLAB_ERR_SINGULARITY,
    QRLAB_ERR_BOUNDARY_BAND,
    QRLAB_ERR_PARAMETER_RANGE,
    QRLAB_ERR_PRECONDITION,
    QRLAB_ERR_UNRESOLVED,
    QRLAB_ERR_BAD_CONFIG,
    QRLAB_ERR_UNKNOWN = 99
} qrlab_status;

const char* qrlab_version(void);
const char* qrlab_last_error(void);

/* Build a map from DSL source text, or from a fixture spec of the form
 * "name" / "name?param=value,param=value" (an optional "fixture:" prefix is
 * accepted). */
qrlab_status qrlab_map_from_source(const char* source, qrlab_map** out);
qrlab_status qrlab_map_from_fixture(const char* spec, qrlab_map** out);
void qrlab_map_free(qrlab_map* map);

/* f(z); out_f = {re, im}. */
qrlab_status qrlab_map_eval(const qrlab_map* map, double re, double im, double out_f[2]);
/* Value and Wirtinger derivatives; out_jet = {f, f_z, f_zbar} as re/im pairs. */
qrlab_status qrlab_map_jet(const qrlab_map* map, double re, double im, double out_jet[6]);
/* DSL text that parses back to an equivalent map. */
qrlab_status qrlab_map_print(const qrlab_map* map, char** out_source);

/* Run an analysis operation with a JSON config and receive a JSON report
 * (schema_version 1). Operations: analyze, index, sectors, portrait,
 * collide, potential, hessian3d, homotopy, bilipschitz, verify. hessian3d
 * and verify accept a NULL map. Unknown config keys are rejected. */
qrlab_status qrlab_run(const qrlab_map* map, const char* op, const char* config_json,
                       char** out_report_json);

void qrlab_free_string(char* s);

#ifdef __cplusplus
}
#endif

#endif /* QRLAB_H */
