//! Hand-written programs shared by the integration tests.

pub const FIELD_FLOW: &str = r#"
class T { Object f; }
class B { }
class Main {
  static void main() {
    T a; T y; B b; Object x;
    a = new T;
    b = new B;
    a.f = b;
    y = a;
    x = y.f;
  }
}
"#;

pub const IDENTITY: &str = r#"
class A { }
class Id { Object id(Object p) { return p; } }
class Main {
  static void main() {
    Id h1; Id h2; A o1; A o2; Object r1; Object r2;
    h1 = new Id;
    h2 = new Id;
    o1 = new A;
    o2 = new A;
    r1 = invokevirtual h1.id(o1);
    r2 = invokevirtual h2.id(o2);
  }
}
"#;

pub const LEAK: &str = r#"
class Src { String source() { String s; s = new String; return s; } }
class Snk { void sink(String s) { return; } }
class Main {
  static void main() {
    Src x; Snk y; String s1; String s2; String s3;
    x = new Src;
    y = new Snk;
    s2 = "abc";
    s1 = invokevirtual x.source();
    s3 = invokevirtual s2.concat(s1);
    invokevirtual y.sink(s3);
  }
}
"#;

pub const LEAK_CONFIG: &str = "
source Src.source() -> result
transfer String.concat(String) from:param 0 to:result
sink Snk.sink(String) param:0
";

pub const BRANCH: &str = r#"
class Main {
  static int main(int p) {
    int x; int y; int z; int zero;
    zero = 0;
    y = 7;
    if p > zero goto A;
    x = 1;
    goto J;
  A: x = 2;
  J: z = x + y;
    return z;
  }
}
"#;

pub const SWITCH: &str = r#"
class Main {
  static int main(int k) {
    int r; int one; int five;
    one = 1; five = 5;
    switch k { case 1: A; case 5: B; default: C; };
  A: r = one;
    goto E;
  B: r = five;
    goto E;
  C: r = k * five;
  E: return r;
  }
}
"#;

pub const TRY_CATCH: &str = r#"
class MyError extends Throwable { }
class Other extends Throwable { }
class Main {
  static void main() {
    MyError e; Throwable c; int a; int b; int q;
    a = 1; b = 0;
  T0: e = new MyError;
    q = a / b;
    throw e;
  T1: c = @catch;
    return;
    catch (MyError, T0, T1, T1);
  }
}
"#;

pub const ARRAYS_STATICS: &str = r#"
class Box { Object v; }
class G { static Object g; static Box shared; }
class Main {
  static void main() {
    Object[] arr; Object[] alias; Object o; Object x; Object y; Box b; Box c; Object z;
    arr = new Object[];
    o = new Object;
    arr[*] = o;
    alias = arr;
    x = alias[*];
    G.g = x;
    y = G.g;
    b = new Box;
    b.v = y;
    G.shared = b;
    invokestatic Main.reader();
  }
  static Object reader() {
    Box c; Object z;
    c = G.shared;
    z = c.v;
    return z;
  }
}
"#;

pub const DISPATCH: &str = r#"
interface Shape { Object area(); }
abstract class Base implements Shape {
  Object tag;
  abstract Object area();
  Object describe() { Object t; t = this.tag; return t; }
}
class Sq extends Base { Object area() { Object r; r = new Object; return r; } }
class Circle extends Base { Object area() { String r; r = "pi"; return r; } }
class Ring extends Circle { }
class Main {
  static void main() {
    Shape s; Base b; Sq q; Ring g; Object a1; Object a2; Object d; Object t;
    q = new Sq;
    g = new Ring;
    t = new Object;
    q.tag = t;
    s = q;
    a1 = invokevirtual s.area();
    s = g;
    a2 = invokevirtual s.area();
    b = q;
    d = invokevirtual b.describe();
  }
}
"#;

pub const SPECIAL_CAST: &str = r#"
class Animal { Object speak() { Object o; o = new Object; return o; } }
class Dog extends Animal {
  Object speak() { String w; w = "woof"; return w; }
  Object parent() { Animal a; Object r; a = this; r = invokespecial a.speak(); return r; }
  Object self() { Object r; r = invokespecial this.speak(); return r; }
}
class Cat extends Animal { }
class Main {
  static void main() {
    Animal x; Dog d; Cat c; Object p; Object s; Dog back; Cat wrong;
    d = new Dog;
    c = new Cat;
    x = d;
    x = c;
    back = (Dog) x;
    wrong = (Cat) x;
    p = invokevirtual back.parent();
    s = invokevirtual back.self();
  }
}
"#;

pub const LIST: &str = r#"
class Node { Node next; Object item; }
class List {
  Node head;
  void add(Object o) {
    Node n; Node h;
    n = new Node;
    n.item = o;
    h = this.head;
    n.next = h;
    this.head = n;
  }
  Object first() { Node h; Object r; h = this.head; r = h.item; return r; }
  Object last() {
    Node cur; Node nx; Object r; int i; int one; int two;
    i = 0; one = 1; two = 2;
    cur = this.head;
  L: if i >= two goto E;
    nx = cur.next;
    cur = nx;
    i = i + one;
    goto L;
  E: r = cur.item;
    return r;
  }
}
class Main {
  static void main() {
    List l; Object a; Object b; Object f; Object z;
    l = new List;
    a = new Object;
    b = "bee";
    invokevirtual l.add(a);
    invokevirtual l.add(b);
    f = invokevirtual l.first();
    z = invokevirtual l.last();
  }
}
"#;

pub const LOOP: &str = r#"
class Acc { int total; Object last; }
class Main {
  static int main() {
    int i; int n; int one; int sum; int two; Acc acc; Object o; boolean done;
    i = 0; n = 10; one = 1; sum = 0; two = 2;
    acc = new Acc;
  L: if i >= n goto E;
    o = new Object;
    acc.last = o;
    sum = sum + two;
    i = i + one;
    goto L;
  E: done = i == n;
    acc.total = sum;
    return sum;
  }
}
"#;

pub const FACTORY: &str = r#"
class Conn { Object data; }
class Pool {
  static Conn cached;
  static Conn make() { Conn c; c = new Conn; Pool.cached = c; return c; }
  static Conn get() { Conn c; c = Pool.cached; return c; }
  static Object wrap(Object o) { Conn c; c = invokestatic Pool.make(); c.data = o; return c; }
}
class Main {
  static void main() {
    Conn a; Conn b; Object w; String k; Object d; Object x;
    k = "key";
    a = invokestatic Pool.make();
    b = invokestatic Pool.get();
    w = invokestatic Pool.wrap(k);
    x = (Conn) w;
    d = b.data;
  }
}
"#;

pub const RECURSION: &str = r#"
class Tree {
  Tree left; Object val;
  Object walk(int depth) {
    Tree l; Object r; int one; int zero;
    zero = 0; one = 1;
    if depth == zero goto B;
    depth = depth - one;
    l = this.left;
    r = invokevirtual l.walk(depth);
    return r;
  B: r = this.val;
    return r;
  }
}
class Main {
  static void main() {
    Tree t; Tree u; Object v; Object out; int d;
    t = new Tree;
    u = new Tree;
    t.left = u;
    u.left = t;
    v = new Object;
    u.val = v;
    d = 3;
    out = invokevirtual t.walk(d);
  }
}
"#;

/// Every corpus program with a short name.
pub const CORPUS: &[(&str, &str)] = &[
    ("field_flow", FIELD_FLOW),
    ("identity", IDENTITY),
    ("leak", LEAK),
    ("branch", BRANCH),
    ("switch", SWITCH),
    ("try_catch", TRY_CATCH),
    ("arrays_statics", ARRAYS_STATICS),
    ("dispatch", DISPATCH),
    ("special_cast", SPECIAL_CAST),
    ("list", LIST),
    ("loop", LOOP),
    ("factory", FACTORY),
    ("recursion", RECURSION),
];
