/* C interface for the scorbit library.
 *
 * Conventions:
 *   - constructors return NULL on failure; scb_last_error() gives the
 *     message (thread-local, owned by the library, valid until the next
 *     failing call on the same thread);
 *   - char* results are owned by the caller: release them with
 *     scb_string_release();
 *   - decision results: 0 = in orbit, 1 = not in orbit, 2 = unknown,
 *     -1 = error.
 *
 * Words and presentations use the same grammar as the CLI:
 *   presentation: "< a, b | a^2, b^3, a*b*a*b >"
 *   word:         "a*b^-2", "1" for the identity
 *   tuple:        comma separated words, e.g. "y, x"
 */

#ifndef SCORBIT_H
#define SCORBIT_H

#include <stddef.h>
#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

/* Opaque backend handle. */
typedef struct ScbBackend ScbBackend;

/* Library version as a static string. */
const char *scb_version(void);

/* Message for the most recent failure on this thread, or NULL. */
const char *scb_last_error(void);

/* Backend constructors. */
ScbBackend *scb_backend_free_group(size_t rank);
ScbBackend *scb_backend_free_abelian(size_t rank);
ScbBackend *scb_backend_dihedral(void);
ScbBackend *scb_backend_finite(const char *presentation, size_t coset_cap);
ScbBackend *scb_backend_rewriting(const char *presentation, size_t max_rules,
                                  size_t max_steps, int32_t assert_hopfian);
void scb_backend_release(ScbBackend *backend);

/* Word problem and normal forms. */
char *scb_normal_form(const ScbBackend *backend, const char *word);
int32_t scb_is_identity(const ScbBackend *backend, const char *word);

/* Orbit membership of a tuple under automorphisms of the group. */
int32_t scb_orbit_decide(const ScbBackend *backend, const char *tuple);
char *scb_orbit_decide_json(const ScbBackend *backend, const char *tuple);

/* Formula emission (S-expression documents). */
char *scb_theta_sexp(const ScbBackend *backend, uint64_t budget);
char *scb_scott_sentence_sexp(const ScbBackend *backend, uint64_t budget);

/* Releases a string returned by this library. */
void scb_string_release(char *s);

#ifdef __cplusplus
}
#endif

#endif /* SCORBIT_H */
