/* fixture_a_harness.c
 * generated by nn2flow 0.1.0
 * model: fixture_a (fnv1a:afd17ed8fafa2a9c)
 * plan: none
 * kind: harness
 */
#include <stdint.h>
#include <stdio.h>
#include <stdlib.h>

extern int predict(const int32_t *x);
#ifdef NN2FLOW_TRACE_EXIT
extern int nn2flow_exit_kind;
#endif

int main(void) {
    char line[65536];
    int32_t x[2];
    long line_no = 0;
    while (fgets(line, sizeof line, stdin)) {
        line_no++;
        const char *p = line;
        int only_space = 1;
        for (const char *q = line; *q; ++q)
            if (*q != ' ' && *q != '\t' && *q != '\r' && *q != '\n') only_space = 0;
        if (only_space) continue;
        for (int i = 0; i < 2; ++i) {
            char *end = NULL;
            long long v = strtoll(p, &end, 10);
            if (end == p || v < INT32_MIN || v > INT32_MAX) {
                fprintf(stderr, "harness: bad row at line %ld\n", line_no);
                return 1;
            }
            x[i] = (int32_t)v;
            p = end;
            if (i + 1 < 2) {
                if (*p != ',') {
                    fprintf(stderr, "harness: bad row at line %ld\n", line_no);
                    return 1;
                }
                p++;
            }
        }
        int cls = predict(x);
#ifdef NN2FLOW_TRACE_EXIT
        printf("%d,%d\n", cls, nn2flow_exit_kind);
#else
        printf("%d\n", cls);
#endif
    }
    return 0;
}
