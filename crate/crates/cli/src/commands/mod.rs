pub mod blowup;
pub mod certify;
pub mod diagram;
pub mod linop;
pub mod parallel;
pub mod revolve;
pub mod solve;
