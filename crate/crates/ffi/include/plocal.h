#ifndef PLOCAL_H
#define PLOCAL_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/*
 Status codes. 0 to 3 mirror the command-line exit codes.
 */
typedef enum PlocalStatus {
  PLOCAL_STATUS_OK = 0,
  /*
   The computation finished with a negative verdict (e.g. not saturated).
   */
  PLOCAL_STATUS_NEGATIVE = 1,
  /*
   Malformed spec, arguments or preconditions.
   */
  PLOCAL_STATUS_INVALID_INPUT = 2,
  PLOCAL_STATUS_CAP_EXCEEDED = 3,
  PLOCAL_STATUS_NULL_POINTER = 4,
  PLOCAL_STATUS_INVALID_UTF8 = 5,
  PLOCAL_STATUS_PANIC = 6,
} PlocalStatus;

/*
 A parsed and validated spec document.
 */
typedef struct PlocalSpec PlocalSpec;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/*
 Library version as a static nul-terminated string.
 */
const char *plocal_version(void);

/*
 Message for the last non-`OK` status on this thread, or null. Valid until the next call.
 */
const char *plocal_last_error(void);

/*
 Parses a JSON spec document.

 # Safety
 `json` must be a nul-terminated string and `out` a valid pointer.
 */
enum PlocalStatus plocal_spec_parse(const char *json, struct PlocalSpec **out);

/*
 Loads a built-in example by name.

 # Safety
 `name` must be a nul-terminated string and `out` a valid pointer.
 */
enum PlocalStatus plocal_spec_builtin(const char *name, struct PlocalSpec **out);

/*
 Releases a spec handle. Null is ignored.

 # Safety
 `spec` must come from this library and not be used afterwards.
 */
void plocal_spec_free(struct PlocalSpec *spec);

/*
 Serializes the spec back to JSON.

 # Safety
 `spec` must be a live handle and `out` a valid pointer.
 */
enum PlocalStatus plocal_spec_to_json(const struct PlocalSpec *spec, char **out);

/*
 Whether the spec is a finite group (1) or a p-toral ambient (0); -1 on null.

 # Safety
 `spec` must be null or a live handle.
 */
int32_t plocal_spec_is_finite_group(const struct PlocalSpec *spec);

/*
 Runs a command-line subcommand against the spec and returns its JSON report.
 `argv` holds the subcommand and its flags without the program name or spec argument,
 e.g. `{"stable", "--degree", "2"}`. On `OK` and `NEGATIVE` the report is written to
 `out`; otherwise `out` is set to null.

 # Safety
 `spec` must be a live handle, `argv` must point to `argc` nul-terminated strings and
 `out` must be a valid pointer.
 */
enum PlocalStatus plocal_spec_run(const struct PlocalSpec *spec,
                                  const char *const *argv,
                                  size_t argc,
                                  char **out);

/*
 Saturation check; `NEGATIVE` when the fusion system is not saturated.

 # Safety
 As for [`plocal_spec_run`].
 */
enum PlocalStatus plocal_check_saturation(const struct PlocalSpec *spec, char **out);

/*
 Stable elements in degree `degree` with coefficients such as `"Z/2"`.

 # Safety
 As for [`plocal_spec_run`]; `coeff` must be a nul-terminated string.
 */
enum PlocalStatus plocal_stable_elements(const struct PlocalSpec *spec,
                                         uint32_t degree,
                                         const char *coeff,
                                         char **out);

/*
 Releases a string returned by this library. Null is ignored.

 # Safety
 `s` must come from this library and not be used afterwards.
 */
void plocal_string_free(char *s);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* PLOCAL_H */
