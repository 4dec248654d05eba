public record Point(int x, int y) {
    public Point {
        if (x < 0) throw new IllegalArgumentException("x<0 /* not comment */");
    }

    static int sum(int... values) {
        int total = 0;
        for (int v : values) total += v;
        return total;
    }
}
