//! Holds the `acceptance` test, which checks the library and command line
//! end to end and prints one PASS/FAIL line per criterion. Kept in its own
//! package so its run comes after the other suites.
