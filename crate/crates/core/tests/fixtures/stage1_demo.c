#include <stdio.h>

int scale(int v) {
    int r = 0;
    r = v;
    r = r * 2;
    return r;
}

int sign_of(int x) {
    if (x > 0) {
        return 1;
    } else {
        return -1;
    }
}

int main(void) {
    int x = 0;
    scanf("%d", &x);
    printf("%d\n", scale(x));
    printf("%d\n", sign_of(x));
    return 0;
}
