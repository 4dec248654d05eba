class Broken {
    int a;
    /* this comment never ends
    int b;
