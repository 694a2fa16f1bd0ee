pub mod export;
pub mod fss;
pub mod sweep;
pub mod verify;
