/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#ifndef FUNSTACK_H
#define FUNSTACK_H

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Status codes. 1–3 mirror the command-line exit codes.
 */
typedef enum FunStatus {
  FunStatus_Ok = 0,
  /**
   * Syntax, type, evaluation or zero-evidence error.
   */
  FunStatus_UserError = 1,
  /**
   * The backend cannot handle the program (e.g. continuous draws on an exact backend).
   */
  FunStatus_Unsupported = 2,
  FunStatus_Internal = 3,
  FunStatus_NullArgument = 4,
  FunStatus_InvalidUtf8 = 5,
  FunStatus_Panic = 6,
} FunStatus;

typedef enum FunBackend {
  /**
   * Enumeration for discrete programs, Monte Carlo otherwise.
   */
  FunBackend_Auto = 0,
  FunBackend_Enum = 1,
  FunBackend_Mt = 2,
  FunBackend_Imp = 3,
  FunBackend_Fg = 4,
  FunBackend_Mc = 5,
} FunBackend;

/**
 * A checked program.
 */
typedef struct FunProgram FunProgram;

typedef struct FunInferOptions {
  enum FunBackend backend;
  uint64_t samples;
  uint64_t seed;
  uint64_t max_support;
  uint32_t max_choices;
} FunInferOptions;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Parse and type-check `source`. On success `*out` owns a new program.
 *
 * # Safety
 * `source` must be a NUL-terminated string and `out` a valid pointer.
 */
enum FunStatus fun_program_parse(const char *source, struct FunProgram **out);

/**
 * Release a program. Null is ignored.
 *
 * # Safety
 * `p` must come from `fun_program_parse` and not be used afterwards.
 */
void fun_program_free(struct FunProgram *p);

/**
 * 1 if the program has no continuous draws or real observations, else 0; -1 for null.
 *
 * # Safety
 * `p` must be null or a live program.
 */
int32_t fun_program_is_discrete(const struct FunProgram *p);

/**
 * Default options: automatic backend, 100000 samples, seed 1.
 */
struct FunInferOptions fun_infer_options_default(void);

/**
 * Run inference; `*out` receives the JSON report (backend, posterior, evidence, diagnostics, seed).
 * A null `options` means the defaults.
 *
 * # Safety
 * `p` must be a live program, `options` null or valid, `out` a valid pointer.
 */
enum FunStatus fun_infer(const struct FunProgram *p,
                         const struct FunInferOptions *options,
                         char **out);

/**
 * The compiled Imp program as text.
 *
 * # Safety
 * As for `fun_infer`.
 */
enum FunStatus fun_compile_imp(const struct FunProgram *p, char **out);

/**
 * The factor graph in Graphviz DOT.
 *
 * # Safety
 * As for `fun_infer`.
 */
enum FunStatus fun_graph_dot(const struct FunProgram *p, char **out);

/**
 * Release a string returned by this library. Null is ignored.
 *
 * # Safety
 * `s` must come from this library and not be used afterwards.
 */
void fun_string_free(char *s);

/**
 * Message for the last failing call on this thread, or null. Valid until
 * the next call into the library on the same thread.
 */
const char *fun_last_error_message(void);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* FUNSTACK_H */
